#pragma once

#include "rtdc/model.hpp"

#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace rtdc {

/// What is known about when each timepoint happened.
///
/// Scheduled controllables carry an exact time. Timepoints that happened during
/// an uninterruptible wait carry an occurrence interval; controllables executed
/// reactively share the interval and the anchor of their trigger, which means
/// they happened at the very same instant.
class ScheduleMemory {
public:
    struct Entry {
        enum class State : std::uint8_t { None, Exact, Bounded };
        State state = State::None;
        Interval window;
        std::int32_t anchor = -1;  // same-instant group, -1 when none
    };

    ScheduleMemory() = default;
    explicit ScheduleMemory(std::size_t num_timepoints) : entries_(num_timepoints) {}

    void set_exact(TimepointId id, const TimeValue& t);
    void set_bounded(TimepointId id, const Interval& window, std::int32_t anchor);

    [[nodiscard]] bool resolved(TimepointId id) const { return entries_.at(id.index).state != Entry::State::None; }
    [[nodiscard]] const Entry& entry(TimepointId id) const { return entries_.at(id.index); }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

    [[nodiscard]] std::map<TimepointId, TimeValue> exact() const;
    [[nodiscard]] std::map<TimepointId, Interval> bounded() const;

    friend bool operator==(const ScheduleMemory& a, const ScheduleMemory& b);

private:
    std::vector<Entry> entries_;
};

enum class Status : std::uint8_t { Open, Satisfied, Violated };

const char* to_string(Status s) noexcept;

/// Rewritten constraint list C' with its satisfaction status.
/// Disjuncts that acquire a True conjunct collapse to a single True literal.
class ConstraintState {
public:
    ConstraintState() = default;
    explicit ConstraintState(const std::vector<Disjunct>& disjuncts);

    /// Constraints of `d` with self-distances resolved and stale bounds
    /// (upper bound before `now`) falsified.
    static ConstraintState initial(const Dtnu& d, const TimeValue& now = TimeValue(0));

    [[nodiscard]] std::size_t num_disjuncts() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
    [[nodiscard]] std::span<const Conjunct> disjunct(std::size_t k) const
    {
        return {conjuncts_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
    }
    [[nodiscard]] std::span<const Conjunct> conjuncts() const noexcept { return conjuncts_; }
    [[nodiscard]] std::vector<Disjunct> disjuncts() const;
    [[nodiscard]] Status status() const noexcept { return status_; }

    /// Whether disjunct k contains a True literal.
    [[nodiscard]] bool disjunct_satisfied(std::size_t k) const;

    friend bool operator==(const ConstraintState&, const ConstraintState&) = default;

private:
    friend ConstraintState rewrite(const ConstraintState&, const ScheduleMemory&, const TimeValue&);

    std::vector<Conjunct> conjuncts_;
    std::vector<std::uint32_t> offsets_;
    Status status_ = Status::Satisfied;
};

class PropagationError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// One reactive rule of a wait: controllables executed the instant `trigger` occurs.
struct ReactiveRule {
    TimepointId trigger;
    std::vector<TimepointId> controllables;
    friend bool operator==(const ReactiveRule&, const ReactiveRule&) = default;
};
using ReactiveMap = std::vector<ReactiveRule>;

struct WaitOccurrence {
    TimepointId timepoint;
    Interval window;
};

/// Status of a rewritten constraint list (pure function of the disjuncts).
Status evaluate(const ConstraintState& c);

/// Rewrites every conjunct that mentions a resolved timepoint of `memory` and
/// falsifies Bounded conjuncts whose upper bound lies before `now`.
ConstraintState rewrite(const ConstraintState& c, const ScheduleMemory& memory, const TimeValue& now);

/// Executes controllable `a` at `t`. Throws PropagationError when `a` is
/// already resolved.
ConstraintState apply_schedule(const ConstraintState& c, ScheduleMemory& memory, TimepointId a, const TimeValue& t);

/// Records timepoints that occurred during a wait ending at `now` and applies
/// the tight-bound rewrite. Controllables listed in `reactive` under an occurred
/// trigger inherit the trigger's window and instant.
ConstraintState apply_wait(const ConstraintState& c, ScheduleMemory& memory, std::span<const WaitOccurrence> occurred,
                           const ReactiveMap& reactive, const TimeValue& now);

}  // namespace rtdc
