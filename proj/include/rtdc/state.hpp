#pragma once

#include "rtdc/propagation.hpp"

#include <map>
#include <vector>

namespace rtdc {

/// Sorted, pairwise disjoint intervals; the last one may be unbounded above.
using Support = std::vector<Interval>;

/// Support offset by `shift` (endpoints widened to [lo + a, hi + b]).
Support shifted(const Support& s, const TimeValue& a, const TimeValue& b);
/// s restricted to [from, +inf).
Support clip_from(const Support& s, const TimeValue& from);
/// Smallest interval containing s restricted to [lo, hi]; empty() when disjoint.
Interval hull_within(const Support& s, const TimeValue& lo, const TimeValue& hi);
/// Sorts and merges overlapping intervals.
Support normalized(Support s);

/// State carried by a DTNU search node.
struct DtnuState {
    TimeValue time;
    ScheduleMemory memory;
    ConstraintState constraints;
    /// Activated uncontrollables still pending, with their remaining absolute support (B).
    std::map<TimepointId, Support> windows;
    std::vector<TimepointId> scheduled;   // O, includes reactive executions
    std::vector<TimepointId> occurred;    // P
    std::vector<TimepointId> since_wait;  // controllables scheduled at `time` since the last wait
};

/// A d-OR child: schedule a controllable now, or wait.
struct Action {
    bool wait = false;
    TimepointId tp{};

    static Action schedule(TimepointId a) { return {false, a}; }
    static Action wait_action() { return {true, {}}; }
    friend bool operator==(const Action&, const Action&) = default;
};

DtnuState initial_state(const Dtnu& d);

/// Unscheduled controllables in declaration order.
std::vector<TimepointId> unscheduled(const Dtnu& d, const DtnuState& s);

/// Child state after executing `a` at the current time.
DtnuState after_schedule(const Dtnu& d, const DtnuState& s, TimepointId a);

}  // namespace rtdc
