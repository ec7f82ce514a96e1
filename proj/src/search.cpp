#include "rtdc/search.hpp"

#include "rtdc/dtn.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace rtdc {

void TreeNode::set_truth(Truth t)
{
    if (truth_ != Truth::Unknown)
        throw std::logic_error("truth attribute assigned twice");
    if (t == Truth::Unknown)
        throw std::logic_error("cannot assign unknown truth");
    truth_ = t;
}

void propagate_truth(TreeNode& n, Truth value)
{
    n.set_truth(value);
    const TreeNode* child = &n;
    for (TreeNode* p = n.parent; p != nullptr; child = p, p = p->parent) {
        if (p->truth() != Truth::Unknown)
            return;
        switch (p->kind) {
        case TreeNode::Kind::Dtnu:
        case TreeNode::Kind::Wait:
            p->set_truth(value);
            break;
        case TreeNode::Kind::DOr:
        case TreeNode::Kind::WOr:
            if (value == Truth::True) {
                p->chosen = child;
                p->set_truth(Truth::True);
            } else if (++p->decided_false == p->arity) {
                p->set_truth(Truth::False);
            } else {
                return;
            }
            break;
        case TreeNode::Kind::And:
            if (value == Truth::False) {
                p->set_truth(Truth::False);
            } else if (++p->decided_true == p->arity) {
                p->set_truth(Truth::True);
            } else {
                return;
            }
            break;
        }
    }
}

std::optional<TimeValue> WaitComputation::duration() const
{
    std::optional<TimeValue> best;
    for (const auto& c : {delta1, delta2, delta3})
        if (c && (!best || *c < *best))
            best = c;
    return best;
}

namespace {

constexpr std::size_t kChainCap = 4096;

void keep_min(std::optional<TimeValue>& best, const TimeValue& at, const TimeValue& now)
{
    if (!at.is_finite() || at <= now)
        return;
    TimeValue d = at - now;
    if (!best || d < *best)
        best = d;
}

}  // namespace

std::optional<WaitComputation> wait_duration(const DtnuState& s)
{
    using Kind = Conjunct::Kind;
    const auto& conj = s.constraints.conjuncts();
    const bool any_bounded =
        std::any_of(conj.begin(), conj.end(), [](const Conjunct& c) { return c.kind == Kind::Bounded; });
    if (s.windows.empty() && !any_bounded)
        return std::nullopt;

    const TimeValue& t = s.time;
    WaitComputation w;
    for (const auto& [u, support] : s.windows)
        for (const auto& i : support) {
            keep_min(w.delta1, i.lo, t);
            keep_min(w.delta1, i.hi, t);
        }

    // Backward chains: v - v' in [x', y'] with x' >= 0 forces v' into
    // [x - y', x - x'] whenever v must be at x.
    std::map<TimepointId, std::vector<const Conjunct*>> into;
    for (const auto& c : conj)
        if (c.kind == Kind::Distance && c.lb >= TimeValue(0))
            into[c.to].push_back(&c);

    std::vector<std::pair<TimepointId, TimeValue>> stack;
    std::set<std::pair<TimepointId, TimeValue>> visited;
    for (const auto& c : conj) {
        if (c.kind != Kind::Bounded)
            continue;
        keep_min(w.delta2, c.lb, t);
        keep_min(w.delta2, c.ub, t);
        for (const auto& x : {c.lb, c.ub})
            if (x.is_finite() && x > t)
                stack.emplace_back(c.to, x);
    }
    while (!stack.empty()) {
        auto [v, x] = stack.back();
        stack.pop_back();
        auto it = into.find(v);
        if (it == into.end())
            continue;
        for (const Conjunct* c : it->second) {
            for (const auto& gap : {c->lb, c->ub}) {
                if (!gap.is_finite())
                    continue;
                TimeValue value = x - gap;
                keep_min(w.delta3, value, t);
                if (value > t && visited.size() < kChainCap && visited.emplace(c->from, value).second)
                    stack.emplace_back(c->from, value);
            }
        }
    }
    if (!w.duration())
        return std::nullopt;
    return w;
}

OutcomeSets enumerate_outcomes(const DtnuState& s, const TimeValue& delta)
{
    OutcomeSets out;
    const TimeValue e = s.time + delta;
    for (const auto& [u, support] : s.windows) {
        Support rest = clip_from(support, s.time);
        if (rest.empty())
            continue;
        if (rest.back().hi <= e)
            out.certain.push_back(u);
        else if (rest.front().lo < e)
            out.may.push_back(u);
        else
            continue;
        out.occurrence.emplace(u, hull_within(rest, s.time, e));
    }
    const std::size_t q = std::size_t{1} << out.may.size();
    out.combinations.reserve(q);
    for (std::size_t mask = 0; mask < q; ++mask) {
        std::vector<TimepointId> lambda = out.certain;
        for (std::size_t i = 0; i < out.may.size(); ++i)
            if (mask & (std::size_t{1} << i))
                lambda.push_back(out.may[i]);
        std::sort(lambda.begin(), lambda.end());
        out.combinations.push_back(std::move(lambda));
    }
    return out;
}

ReactiveChoice enumerate_reactive(const Dtnu& d, const DtnuState& s, const OutcomeSets& outcomes,
                                  const TimeValue& wait_end)
{
    std::vector<TimepointId> triggers = outcomes.may;
    triggers.insert(triggers.end(), outcomes.certain.begin(), outcomes.certain.end());
    std::sort(triggers.begin(), triggers.end());

    ReactiveChoice out;
    const auto conj = s.constraints.conjuncts();
    for (auto phi : unscheduled(d, s)) {
        std::optional<TimepointId> trigger;
        for (auto u : triggers) {
            bool linked = std::any_of(conj.begin(), conj.end(), [&](const Conjunct& c) {
                return c.kind == Conjunct::Kind::Distance && c.to == u && c.from == phi && c.lb == TimeValue(0) &&
                       c.ub >= TimeValue(0);
            });
            if (linked) {
                trigger = u;
                break;
            }
        }
        if (!trigger)
            continue;
        const Interval& when = outcomes.occurrence.at(*trigger);
        bool activates_late = true;
        for (const auto* link : d.links_from(phi))
            activates_late = activates_late && when.lo + link->intervals.front().lo > wait_end;
        if (!activates_late)
            continue;
        out.eligible.push_back(phi);
        out.trigger.emplace(phi, *trigger);
    }

    const std::size_t m = std::size_t{1} << out.eligible.size();
    out.strategies.reserve(m);
    for (std::size_t mask = 0; mask < m; ++mask) {
        std::map<TimepointId, std::vector<TimepointId>> by_trigger;
        for (std::size_t i = 0; i < out.eligible.size(); ++i)
            if (mask & (std::size_t{1} << i))
                by_trigger[out.trigger.at(out.eligible[i])].push_back(out.eligible[i]);
        ReactiveMap r;
        for (auto& [u, phis] : by_trigger)
            r.push_back({u, std::move(phis)});
        out.strategies.push_back(std::move(r));
    }
    return out;
}

DtnuState after_wait(const Dtnu& d, const DtnuState& s, const OutcomeSets& outcomes,
                     const std::vector<TimepointId>& lambda, const ReactiveMap& reactive, const TimeValue& wait_end)
{
    DtnuState next;
    next.time = wait_end;
    next.memory = s.memory;
    next.windows = s.windows;
    next.scheduled = s.scheduled;
    next.occurred = s.occurred;

    std::vector<WaitOccurrence> occ;
    occ.reserve(lambda.size());
    for (auto u : lambda) {
        occ.push_back({u, outcomes.occurrence.at(u)});
        next.windows.erase(u);
        next.occurred.push_back(u);
    }
    for (auto& [u, support] : next.windows)
        support = clip_from(support, wait_end);
    for (const auto& rule : reactive) {
        if (std::find(lambda.begin(), lambda.end(), rule.trigger) == lambda.end())
            continue;
        const Interval& when = outcomes.occurrence.at(rule.trigger);
        for (auto phi : rule.controllables) {
            next.scheduled.push_back(phi);
            for (const auto* link : d.links_from(phi))
                next.windows[link->target] = shifted(link->intervals, when.lo, when.hi);
        }
    }
    next.constraints = apply_wait(s.constraints, next.memory, occ, reactive, wait_end);
    return next;
}

const char* to_string(Verdict::Kind k) noexcept
{
    switch (k) {
    case Verdict::Kind::Rtdc:
        return "rtdc";
    case Verdict::Kind::NotRtdc:
        return "not-rtdc";
    case Verdict::Kind::Timeout:
        return "timeout";
    }
    return "?";
}

std::vector<Action> baseline_actions(const Dtnu& d, const DtnuState& s)
{
    std::vector<Action> out;
    for (auto a : unscheduled(d, s))
        out.push_back(Action::schedule(a));
    if (wait_duration(s))
        out.push_back(Action::wait_action());
    return out;
}

namespace {

struct SearchTimeout {};

class Search {
public:
    Search(const Dtnu& d, const SearchConfig& cfg) : d_(d), cfg_(cfg), rng_(cfg.seed) {}

    std::uint64_t nodes() const noexcept { return nodes_; }

    void run(TreeNode& root) { explore(root, &root, 0); }

private:
    using Kind = TreeNode::Kind;

    void tick()
    {
        ++nodes_;
        if (cfg_.timeout.count() > 0 && std::chrono::steady_clock::now() - start_ > cfg_.timeout)
            throw SearchTimeout{};
    }

    static void release(TreeNode& n)
    {
        n.children.clear();
        n.state.reset();
        n.tried.clear();
    }

    /// Frees subtrees that cannot belong to the strategy.
    static void settle(TreeNode& parent, TreeNode& child)
    {
        if (child.truth() == Truth::False || (child.truth() == Truth::True && parent.chosen != nullptr &&
                                              parent.chosen != &child && parent.kind != Kind::And))
            release(child);
    }

    TreeNode& add_child(TreeNode& parent, Kind kind)
    {
        auto node = std::make_unique<TreeNode>();
        node->kind = kind;
        node->parent = &parent;
        parent.children.push_back(std::move(node));
        return *parent.children.back();
    }

    static const DtnuState& dtnu_ancestor(const TreeNode& n)
    {
        const TreeNode* p = n.parent;
        while (p->kind != Kind::Dtnu)
            p = p->parent;
        return *p->state;
    }

    std::optional<Truth> leaf_truth(TreeNode& n)
    {
        const DtnuState& s = *n.state;
        const Status status = s.constraints.status();
        if (status == Status::Satisfied) {
            for (auto a : unscheduled(d_, s))
                n.leaf_times.emplace(a, s.time);
            n.leaf = true;
            return Truth::True;
        }
        if (status == Status::Violated && cfg_.constraint_check)
            return Truth::False;
        if (s.occurred.size() != d_.num_uncontrollables())
            return std::nullopt;
        if (status == Status::Violated)
            return Truth::False;
        DtnProblem p{unscheduled(d_, s), {}, s.time};
        for (std::size_t k = 0; k < s.constraints.num_disjuncts(); ++k) {
            if (s.constraints.disjunct_satisfied(k))
                continue;
            auto span = s.constraints.disjunct(k);
            p.disjuncts.push_back({{span.begin(), span.end()}});
        }
        auto solution = solve_dtn(p);
        if (!solution)
            return Truth::False;
        n.leaf_times = std::move(solution->assignment);
        n.leaf = true;
        return Truth::True;
    }

    std::vector<Action> order(const DtnuState& s, int depth)
    {
        auto actions = baseline_actions(d_, s);
        if (cfg_.heuristic != nullptr && depth <= cfg_.max_depth)
            actions = cfg_.heuristic->rank(d_, s, actions);
        else if (cfg_.child_order == SearchConfig::ChildOrder::Random)
            std::shuffle(actions.begin(), actions.end(), rng_);
        if (depth == 1 && cfg_.root_action) {
            auto keep = *cfg_.root_action;
            std::erase_if(actions, [&](const Action& a) { return !(a == keep); });
        }
        return actions;
    }

    bool halted(const TreeNode& n) const { return cfg_.truth_checks && n.truth() != Truth::Unknown; }

    void explore(TreeNode& n, TreeNode* chain, int depth)
    {
        tick();
        if (cfg_.truth_checks && n.parent != nullptr && n.parent->truth() != Truth::Unknown)
            return;
        switch (n.kind) {
        case Kind::Dtnu: {
            if (auto t = leaf_truth(n)) {
                n.state.reset();
                propagate_truth(n, *t);
                return;
            }
            auto& dor = add_child(n, Kind::DOr);
            explore(dor, chain, depth + 1);
            n.state.reset();
            n.tried.clear();
            return;
        }
        case Kind::DOr: {
            const DtnuState& s = *n.parent->state;
            const auto actions = order(s, depth);
            n.arity = actions.size();
            if (n.arity == 0) {
                propagate_truth(n, Truth::False);
                return;
            }
            for (const auto& action : actions) {
                if (halted(n))
                    break;
                if (action.wait) {
                    auto& w = add_child(n, Kind::Wait);
                    w.duration = *wait_duration(s)->duration();
                    explore(w, chain, depth);
                    settle(n, w);
                    continue;
                }
                auto& child = add_child(n, Kind::Dtnu);
                child.time = s.time;
                child.scheduled = action.tp;
                if (cfg_.symmetric_subtrees) {
                    std::vector<std::uint32_t> key;
                    for (auto a : s.since_wait)
                        key.push_back(a.index);
                    key.push_back(action.tp.index);
                    std::sort(key.begin(), key.end());
                    if (!chain->tried.insert(std::move(key)).second) {
                        // Same controllables at the same instant: an identical subtree was already decided.
                        propagate_truth(child, Truth::False);
                        continue;
                    }
                }
                child.state = std::make_unique<DtnuState>(after_schedule(d_, s, action.tp));
                explore(child, chain, depth);
                settle(n, child);
            }
            return;
        }
        case Kind::Wait: {
            auto& wor = add_child(n, Kind::WOr);
            explore(wor, chain, depth);
            return;
        }
        case Kind::WOr: {
            const DtnuState& s = dtnu_ancestor(n);
            const TimeValue e = s.time + n.parent->duration;
            const auto outcomes = enumerate_outcomes(s, n.parent->duration);
            auto choice = enumerate_reactive(d_, s, outcomes, e);
            n.arity = choice.strategies.size();
            for (auto& r : choice.strategies) {
                if (halted(n))
                    break;
                auto& a = add_child(n, Kind::And);
                a.reactive = std::move(r);
                a.certain = outcomes.certain;
                explore(a, chain, depth);
                settle(n, a);
            }
            return;
        }
        case Kind::And: {
            const DtnuState& s = dtnu_ancestor(n);
            const TimeValue duration = n.parent->parent->duration;
            const TimeValue e = s.time + duration;
            const auto outcomes = enumerate_outcomes(s, duration);
            n.arity = outcomes.combinations.size();
            for (const auto& lambda : outcomes.combinations) {
                if (halted(n))
                    break;
                auto& child = add_child(n, Kind::Dtnu);
                child.time = e;
                child.outcome = lambda;
                child.state = std::make_unique<DtnuState>(after_wait(d_, s, outcomes, lambda, n.reactive, e));
                explore(child, &child, depth);
                settle(n, child);
            }
            return;
        }
        }
    }

    const Dtnu& d_;
    const SearchConfig& cfg_;
    std::mt19937_64 rng_;
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
    std::uint64_t nodes_ = 0;
};

}  // namespace

Verdict check_rtdc(const Dtnu& d, const SearchConfig& cfg)
{
    const auto start = std::chrono::steady_clock::now();
    TreeNode root;
    root.kind = TreeNode::Kind::Dtnu;
    root.state = std::make_unique<DtnuState>(initial_state(d));
    root.time = root.state->time;

    Search search(d, cfg);
    Verdict v;
    try {
        search.run(root);
        if (root.truth() == Truth::True) {
            v.kind = Verdict::Kind::Rtdc;
            v.strategy = extract_strategy(d, root);
        } else if (root.truth() == Truth::False) {
            v.kind = Verdict::Kind::NotRtdc;
        } else {
            throw std::logic_error("search finished without a root truth value");
        }
    } catch (const SearchTimeout&) {
        v.kind = Verdict::Kind::Timeout;
    }
    v.nodes = search.nodes();
    v.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return v;
}

}  // namespace rtdc
