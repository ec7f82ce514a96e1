#include "rtdc/state.hpp"

#include <algorithm>

namespace rtdc {

Support normalized(Support s)
{
    std::sort(s.begin(), s.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    Support out;
    for (const auto& i : s) {
        if (i.empty())
            continue;
        if (!out.empty() && i.lo <= out.back().hi)
            out.back().hi = max(out.back().hi, i.hi);
        else
            out.push_back(i);
    }
    return out;
}

Support shifted(const Support& s, const TimeValue& a, const TimeValue& b)
{
    Support out;
    out.reserve(s.size());
    for (const auto& i : s)
        out.push_back({i.lo + a, i.hi + b});
    return normalized(std::move(out));
}

Support clip_from(const Support& s, const TimeValue& from)
{
    Support out;
    for (const auto& i : s)
        if (i.hi >= from)
            out.push_back({max(i.lo, from), i.hi});
    return out;
}

Interval hull_within(const Support& s, const TimeValue& lo, const TimeValue& hi)
{
    Interval out{TimeValue(1), TimeValue(0)};
    bool any = false;
    for (const auto& i : s) {
        Interval cut{max(i.lo, lo), min(i.hi, hi)};
        if (cut.empty())
            continue;
        out = any ? Interval{min(out.lo, cut.lo), max(out.hi, cut.hi)} : cut;
        any = true;
    }
    return out;
}

DtnuState initial_state(const Dtnu& d)
{
    DtnuState s;
    s.time = TimeValue(0);
    s.memory = ScheduleMemory(d.size());
    s.constraints = ConstraintState::initial(d, s.time);
    return s;
}

std::vector<TimepointId> unscheduled(const Dtnu& d, const DtnuState& s)
{
    std::vector<TimepointId> out;
    for (auto a : d.controllables())
        if (!s.memory.resolved(a))
            out.push_back(a);
    return out;
}

DtnuState after_schedule(const Dtnu& d, const DtnuState& s, TimepointId a)
{
    DtnuState next = s;
    next.constraints = apply_schedule(s.constraints, next.memory, a, s.time);
    for (const auto* link : d.links_from(a))
        next.windows[link->target] = shifted(link->intervals, s.time, s.time);
    next.scheduled.push_back(a);
    next.since_wait.push_back(a);
    return next;
}

}  // namespace rtdc
