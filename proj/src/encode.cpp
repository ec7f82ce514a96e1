#include "rtdc/encode.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

namespace rtdc {

int distance_class(double x)
{
    if (!(x >= 0.0 && x <= 1.0))
        throw OutOfRange("normalized value outside [0, 1]");
    return std::min(static_cast<int>(std::floor(10.0 * x)), 9);
}

int distance_class(const TimeValue& v, const TimeValue& d_max)
{
    const TimeValue mag = v < TimeValue(0) ? -v : v;
    if (!mag.is_finite() || !d_max.is_finite() || !(TimeValue(0) < d_max) || d_max < mag)
        throw OutOfRange("value outside [-d_max, d_max]");
    const TimeValue r = mag / d_max;
    return static_cast<int>(std::min<std::int64_t>(TimeValue(r.numerator() * 10, r.denominator()).floor(), 9));
}

std::vector<std::vector<std::uint8_t>> GraphEncoding::adjacency() const
{
    std::vector<std::vector<std::uint8_t>> a(num_nodes(), std::vector<std::uint8_t>(num_nodes(), 0));
    for (const auto& e : edges)
        a[e.i][e.j] = a[e.j][e.i] = 1;
    return a;
}

std::vector<std::vector<std::pair<std::size_t, std::size_t>>> GraphEncoding::neighbours() const
{
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> n(num_nodes());
    for (std::size_t k = 0; k < edges.size(); ++k) {
        n[edges[k].i].emplace_back(edges[k].j, k);
        n[edges[k].j].emplace_back(edges[k].i, k);
    }
    return n;
}

namespace {

Interval hull(const std::vector<Interval>& s)
{
    Interval h{s.front().lo, s.front().hi};
    for (const auto& i : s) {
        h.lo = min(h.lo, i.lo);
        h.hi = max(h.hi, i.hi);
    }
    return h;
}

class Builder {
public:
    Builder(const Dtnu& d, const DtnuState& s) : d_(d), s_(s) {}

    GraphEncoding build()
    {
        collect();
        horizon();
        for (auto a : unscheduled(d_, s_)) {
            index_[a] = add_node(NodeType::Controllable);
            g_.active.push_back({index_[a], Action::schedule(a)});
        }
        for (auto u : d_.uncontrollables())
            if (std::find(s_.occurred.begin(), s_.occurred.end(), u) == s_.occurred.end())
                index_[u] = add_node(NodeType::Uncontrollable);
        wait_ = add_node(NodeType::Wait);
        g_.active.push_back({wait_, Action::wait_action()});

        for (const auto& [u, iv] : links_) {
            const auto* link = d_.link_to(u);
            add_edge(node_of(link->source), node_of(u), iv, EdgeType::Contingency);
        }
        for (const auto& [u, iv] : windows_)
            add_edge(node_of(u), wait_, iv, EdgeType::Contingency);
        for (const auto& live : disjuncts_) {
            const std::size_t hub = add_node(NodeType::DisjunctHub);
            if (live.size() == 1) {
                attach(live.front(), hub);
                continue;
            }
            for (const auto& c : live) {
                const std::size_t q = add_node(NodeType::ConjunctHub);
                add_edge(hub, q, std::nullopt, EdgeType::Membership);
                attach(c, q);
            }
        }
        std::sort(g_.edges.begin(), g_.edges.end(),
                  [](const GraphEdge& a, const GraphEdge& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
        return std::move(g_);
    }

private:
    void collect()
    {
        for (std::size_t k = 0; k < s_.constraints.num_disjuncts(); ++k) {
            if (s_.constraints.disjunct_satisfied(k))
                continue;
            std::vector<Conjunct> live;
            for (const auto& c : s_.constraints.disjunct(k)) {
                if (c.kind == Conjunct::Kind::Distance) {
                    live.push_back(c);
                    note(c.lb);
                    note(c.ub);
                } else if (c.kind == Conjunct::Kind::Bounded) {
                    live.push_back(Conjunct::bounded(c.to, rel(c.lb), rel(c.ub)));
                    note(rel(c.lb));
                    note(rel(c.ub));
                }
            }
            disjuncts_.push_back(std::move(live));
        }
        for (const auto& [u, support] : s_.windows) {
            if (support.empty())
                continue;
            const Interval h = hull(support);
            Interval iv{max(h.lo, s_.time) - s_.time, rel(h.hi)};
            note(iv.lo);
            note(iv.hi);
            windows_.emplace_back(u, iv);
        }
        for (const auto& link : d_.contingencies()) {
            if (s_.memory.resolved(link.source) || s_.windows.contains(link.target) ||
                std::find(s_.occurred.begin(), s_.occurred.end(), link.target) != s_.occurred.end())
                continue;
            const Interval h = hull(link.intervals);
            note(h.lo);
            note(h.hi);
            links_.emplace_back(link.target, h);
        }
    }

    void horizon()
    {
        if (!d_max_ || *d_max_ == TimeValue(0))
            throw DegenerateHorizon("no positive finite bound to normalize by");
        g_.d_max = *d_max_;
    }

    TimeValue rel(const TimeValue& v) const { return v.is_finite() ? v - s_.time : v; }

    void note(const TimeValue& v)
    {
        if (!v.is_finite())
            return;
        const TimeValue mag = v < TimeValue(0) ? -v : v;
        if (!d_max_ || *d_max_ < mag)
            d_max_ = mag;
    }

    std::size_t add_node(NodeType t)
    {
        std::vector<float> f(kNodeFeatureDim, 0.0F);
        f[static_cast<std::size_t>(t)] = 1.0F;
        g_.node_features.push_back(std::move(f));
        return g_.node_features.size() - 1;
    }

    std::size_t node_of(TimepointId id) const
    {
        auto it = index_.find(id);
        if (it == index_.end())
            throw std::logic_error("constraint on resolved timepoint '" + d_.name(id) + "'");
        return it->second;
    }

    // Edge seen from `a`: the value of node(b) - node(a) lies in `iv`.
    void add_edge(std::size_t a, std::size_t b, const std::optional<Interval>& iv, EdgeType type)
    {
        std::vector<float> f(kEdgeFeatureDim, 0.0F);
        if (iv) {
            const TimeValue& lo = iv->lo;
            const TimeValue& hi = iv->hi;
            const bool unbounded = !lo.is_finite() || !hi.is_finite();
            f[lo.is_finite() ? static_cast<std::size_t>(distance_class(lo, g_.d_max)) : 9] = 1.0F;
            f[kDistanceClasses + (hi.is_finite() ? static_cast<std::size_t>(distance_class(hi, g_.d_max)) : 9)] =
                1.0F;
            f[23] = lo < TimeValue(0) ? 1.0F : 0.0F;
            f[24] = hi < TimeValue(0) ? 1.0F : 0.0F;
            f[25] = unbounded ? 1.0F : 0.0F;
        }
        f[2 * kDistanceClasses + static_cast<std::size_t>(type)] = 1.0F;
        g_.edges.push_back({std::min(a, b), std::max(a, b), std::move(f)});
    }

    // Hub-to-timepoint edges: `to` sees [lb, ub], `from` sees [-ub, -lb];
    // Bounded conjuncts use the WAIT node as `from`.
    void attach(const Conjunct& c, std::size_t hub)
    {
        const Interval fwd{c.lb, c.ub};
        const Interval back{-c.ub, -c.lb};
        add_edge(hub, node_of(c.to), fwd, EdgeType::Constraint);
        if (c.kind == Conjunct::Kind::Bounded)
            add_edge(hub, wait_, back, EdgeType::Constraint);
        else if (c.from != c.to)
            add_edge(hub, node_of(c.from), back, EdgeType::Constraint);
    }

    const Dtnu& d_;
    const DtnuState& s_;
    GraphEncoding g_;
    std::optional<TimeValue> d_max_;
    std::map<TimepointId, std::size_t> index_;
    std::size_t wait_ = 0;
    std::vector<std::vector<Conjunct>> disjuncts_;
    std::vector<std::pair<TimepointId, Interval>> windows_;
    std::vector<std::pair<TimepointId, Interval>> links_;
};

}  // namespace

GraphEncoding to_graph(const Dtnu& d, const DtnuState& s) { return Builder(d, s).build(); }

nlohmann::json graph_to_json(const Dtnu& d, const GraphEncoding& g)
{
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : g.edges)
        edges.push_back({{"i", e.i}, {"j", e.j}, {"features", e.features}});
    nlohmann::json active = nlohmann::json::array();
    for (const auto& a : g.active)
        active.push_back({{"node", a.node}, {"choice", a.choice.wait ? std::string("WAIT") : d.name(a.choice.tp)}});
    return {{"node_features", g.node_features}, {"edges", std::move(edges)}, {"active", std::move(active)}};
}

GraphEncoding graph_from_json(const Dtnu& d, const nlohmann::json& j)
{
    GraphEncoding g;
    g.node_features = j.at("node_features").get<std::vector<std::vector<float>>>();
    for (const auto& e : j.at("edges"))
        g.edges.push_back({e.at("i").get<std::size_t>(), e.at("j").get<std::size_t>(),
                           e.at("features").get<std::vector<float>>()});
    for (const auto& a : j.at("active")) {
        const auto choice = a.at("choice").get<std::string>();
        Action act = Action::wait_action();
        if (choice != "WAIT") {
            auto id = d.find(choice);
            if (!id)
                throw std::invalid_argument("unknown active choice '" + choice + "'");
            act = Action::schedule(*id);
        }
        g.active.push_back({a.at("node").get<std::size_t>(), act});
    }
    return g;
}

}  // namespace rtdc
