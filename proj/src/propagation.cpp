#include "rtdc/propagation.hpp"

#include <algorithm>

namespace rtdc {

void ScheduleMemory::set_exact(TimepointId id, const TimeValue& t)
{
    auto& e = entries_.at(id.index);
    if (e.state != Entry::State::None)
        throw PropagationError("timepoint " + std::to_string(id.index) + " already scheduled");
    if (!t.is_finite())
        throw PropagationError("schedule time must be finite");
    e = {Entry::State::Exact, {t, t}, -1};
}

void ScheduleMemory::set_bounded(TimepointId id, const Interval& window, std::int32_t anchor)
{
    auto& e = entries_.at(id.index);
    if (e.state != Entry::State::None)
        throw PropagationError("timepoint " + std::to_string(id.index) + " already scheduled");
    if (window.empty() || !window.lo.is_finite() || !window.hi.is_finite())
        throw PropagationError("occurrence window must be a finite non-empty interval");
    e = {Entry::State::Bounded, window, anchor};
}

std::map<TimepointId, TimeValue> ScheduleMemory::exact() const
{
    std::map<TimepointId, TimeValue> out;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].state == Entry::State::Exact)
            out.emplace(TimepointId{static_cast<std::uint32_t>(i)}, entries_[i].window.lo);
    return out;
}

std::map<TimepointId, Interval> ScheduleMemory::bounded() const
{
    std::map<TimepointId, Interval> out;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].state == Entry::State::Bounded)
            out.emplace(TimepointId{static_cast<std::uint32_t>(i)}, entries_[i].window);
    return out;
}

bool operator==(const ScheduleMemory& a, const ScheduleMemory& b)
{
    if (a.entries_.size() != b.entries_.size())
        return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
        const auto& x = a.entries_[i];
        const auto& y = b.entries_[i];
        if (x.state != y.state || (x.state != ScheduleMemory::Entry::State::None && x.window != y.window))
            return false;
    }
    return true;
}

const char* to_string(Status s) noexcept
{
    switch (s) {
    case Status::Open:
        return "open";
    case Status::Satisfied:
        return "satisfied";
    case Status::Violated:
        return "violated";
    }
    return "?";
}

ConstraintState::ConstraintState(const std::vector<Disjunct>& disjuncts)
{
    offsets_.push_back(0);
    for (const auto& d : disjuncts) {
        conjuncts_.insert(conjuncts_.end(), d.conjuncts.begin(), d.conjuncts.end());
        offsets_.push_back(static_cast<std::uint32_t>(conjuncts_.size()));
    }
    status_ = evaluate(*this);
}

ConstraintState ConstraintState::initial(const Dtnu& d, const TimeValue& now)
{
    return rewrite(ConstraintState(d.constraints()), ScheduleMemory(d.size()), now);
}

std::vector<Disjunct> ConstraintState::disjuncts() const
{
    std::vector<Disjunct> out;
    for (std::size_t k = 0; k < num_disjuncts(); ++k) {
        auto span = disjunct(k);
        out.push_back({{span.begin(), span.end()}});
    }
    return out;
}

bool ConstraintState::disjunct_satisfied(std::size_t k) const
{
    auto span = disjunct(k);
    return std::any_of(span.begin(), span.end(), [](const Conjunct& c) { return c.kind == Conjunct::Kind::True; });
}

Status evaluate(const ConstraintState& c)
{
    bool all_satisfied = true;
    for (std::size_t k = 0; k < c.num_disjuncts(); ++k) {
        bool satisfied = false, all_false = true;
        for (const auto& conj : c.disjunct(k)) {
            if (conj.kind == Conjunct::Kind::True)
                satisfied = true;
            if (conj.kind != Conjunct::Kind::False)
                all_false = false;
        }
        if (all_false)
            return Status::Violated;
        all_satisfied = all_satisfied && satisfied;
    }
    return all_satisfied ? Status::Satisfied : Status::Open;
}

namespace {

using Kind = Conjunct::Kind;
using State = ScheduleMemory::Entry::State;

/// Rewrites a single unresolved conjunct against the memory.
Conjunct rewrite_one(const Conjunct& c, const ScheduleMemory& memory, const TimeValue& now)
{
    Conjunct out = c;
    if (c.kind == Kind::Distance) {
        if (c.to == c.from)
            return Conjunct::literal(c.lb <= TimeValue(0) && TimeValue(0) <= c.ub);
        const auto& to = memory.entry(c.to);
        const auto& from = memory.entry(c.from);
        const bool to_known = to.state != State::None;
        const bool from_known = from.state != State::None;
        if (to_known && from_known) {
            // Must hold for every pair of values inside the two windows.
            Interval diff{to.window.lo - from.window.hi, to.window.hi - from.window.lo};
            if (to.anchor >= 0 && to.anchor == from.anchor)
                diff = {TimeValue(0), TimeValue(0)};
            return Conjunct::literal(c.lb <= diff.lo && diff.hi <= c.ub);
        }
        if (from_known) {
            out = Conjunct::bounded(c.to, from.window.hi + c.lb, from.window.lo + c.ub);
        } else if (to_known) {
            out = Conjunct::bounded(c.from, to.window.hi - c.ub, to.window.lo - c.lb);
        } else {
            return out;
        }
        if (out.ub < out.lb)
            return Conjunct::literal(false);
    }
    if (out.kind == Kind::Bounded) {
        const auto& e = memory.entry(out.to);
        if (e.state != State::None)
            return Conjunct::literal(out.lb <= e.window.lo && e.window.hi <= out.ub);
        if (out.ub < now)
            return Conjunct::literal(false);
    }
    return out;
}

}  // namespace

ConstraintState rewrite(const ConstraintState& c, const ScheduleMemory& memory, const TimeValue& now)
{
    ConstraintState out;
    out.conjuncts_.reserve(c.conjuncts_.size());
    out.offsets_.reserve(c.offsets_.size());
    out.offsets_.push_back(0);
    bool all_satisfied = true, violated = false;
    for (std::size_t k = 0; k < c.num_disjuncts(); ++k) {
        const std::size_t begin = out.conjuncts_.size();
        bool satisfied = false, all_false = true;
        for (const auto& conj : c.disjunct(k)) {
            Conjunct r = conj.is_literal() ? conj : rewrite_one(conj, memory, now);
            if (r.kind == Kind::True) {
                satisfied = true;
                break;
            }
            if (r.kind != Kind::False)
                all_false = false;
            out.conjuncts_.push_back(r);
        }
        if (satisfied) {
            out.conjuncts_.resize(begin);
            out.conjuncts_.push_back(Conjunct::literal(true));
        } else {
            all_satisfied = false;
            violated = violated || all_false;
        }
        out.offsets_.push_back(static_cast<std::uint32_t>(out.conjuncts_.size()));
    }
    out.status_ = violated ? Status::Violated : all_satisfied ? Status::Satisfied : Status::Open;
    return out;
}

ConstraintState apply_schedule(const ConstraintState& c, ScheduleMemory& memory, TimepointId a, const TimeValue& t)
{
    if (memory.resolved(a))
        throw PropagationError("timepoint " + std::to_string(a.index) + " already scheduled");
    memory.set_exact(a, t);
    return rewrite(c, memory, t);
}

ConstraintState apply_wait(const ConstraintState& c, ScheduleMemory& memory, std::span<const WaitOccurrence> occurred,
                           const ReactiveMap& reactive, const TimeValue& now)
{
    for (const auto& occ : occurred) {
        const auto anchor = static_cast<std::int32_t>(occ.timepoint.index);
        memory.set_bounded(occ.timepoint, occ.window, anchor);
        for (const auto& rule : reactive) {
            if (rule.trigger != occ.timepoint)
                continue;
            for (auto a : rule.controllables)
                memory.set_bounded(a, occ.window, anchor);
        }
    }
    return rewrite(c, memory, now);
}

}  // namespace rtdc
