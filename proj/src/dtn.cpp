#include "rtdc/dtn.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace rtdc {

namespace {

/// All-pairs shortest paths of an STN distance graph, maintained
/// incrementally. Node 0 is the origin (time zero).
class DistanceMatrix {
public:
    explicit DistanceMatrix(std::size_t nodes) : n_(nodes), d_(nodes * nodes, TimeValue::infinity())
    {
        for (std::size_t i = 0; i < n_; ++i)
            at(i, i) = TimeValue(0);
    }

    TimeValue& at(std::size_t i, std::size_t j) { return d_[i * n_ + j]; }
    [[nodiscard]] const TimeValue& at(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }

    /// Would adding x_v - x_u <= w keep the network consistent?
    [[nodiscard]] bool admits(std::size_t u, std::size_t v, const TimeValue& w) const
    {
        if (!w.is_finite())
            return true;
        const auto& back = at(v, u);
        return !back.is_finite() || back + w >= TimeValue(0);
    }

    /// Adds x_v - x_u <= w; false when it creates a negative cycle.
    bool add(std::size_t u, std::size_t v, const TimeValue& w)
    {
        if (!w.is_finite())
            return true;
        if (!admits(u, v, w))
            return false;
        if (at(u, v) <= w)
            return true;
        for (std::size_t i = 0; i < n_; ++i) {
            const auto& iu = at(i, u);
            if (!iu.is_finite())
                continue;
            const TimeValue via = iu + w;
            for (std::size_t j = 0; j < n_; ++j) {
                const auto& vj = at(v, j);
                if (!vj.is_finite())
                    continue;
                TimeValue cand = via + vj;
                if (cand < at(i, j))
                    at(i, j) = cand;
            }
        }
        return true;
    }

private:
    std::size_t n_;
    std::vector<TimeValue> d_;
};

struct Edge {
    std::size_t u, v;
    TimeValue w;
};

class Network {
public:
    Network(std::span<const TimepointId> variables, const TimeValue& floor) : matrix_(variables.size() + 1)
    {
        for (std::size_t i = 0; i < variables.size(); ++i)
            index_.emplace(variables[i].index, i + 1);
        vars_.assign(variables.begin(), variables.end());
        for (std::size_t i = 0; i < variables.size(); ++i)
            ok_ = ok_ && matrix_.add(i + 1, 0, -floor);
    }

    [[nodiscard]] bool ok() const noexcept { return ok_; }

    /// Edges encoding a conjunct; nullopt for a False literal.
    [[nodiscard]] std::optional<std::vector<Edge>> edges(const Conjunct& c) const
    {
        std::vector<Edge> out;
        switch (c.kind) {
        case Conjunct::Kind::True:
            return out;
        case Conjunct::Kind::False:
            return std::nullopt;
        case Conjunct::Kind::Bounded: {
            auto v = node(c.to);
            out.push_back({0, v, c.ub});
            out.push_back({v, 0, -c.lb});
            return out;
        }
        case Conjunct::Kind::Distance: {
            auto to = node(c.to);
            auto from = node(c.from);
            out.push_back({from, to, c.ub});
            out.push_back({to, from, -c.lb});
            return out;
        }
        }
        return out;
    }

    [[nodiscard]] bool admits(const Conjunct& c) const
    {
        if (c.kind == Conjunct::Kind::Distance && c.to == c.from)
            return c.lb <= TimeValue(0) && TimeValue(0) <= c.ub;
        auto es = edges(c);
        if (!es)
            return false;
        return std::all_of(es->begin(), es->end(), [&](const Edge& e) { return matrix_.admits(e.u, e.v, e.w); });
    }

    bool add(const Conjunct& c)
    {
        if (c.kind == Conjunct::Kind::Distance && c.to == c.from)
            return ok_ = ok_ && c.lb <= TimeValue(0) && TimeValue(0) <= c.ub;
        auto es = edges(c);
        if (!es)
            return ok_ = false;
        for (const auto& e : *es)
            ok_ = ok_ && matrix_.add(e.u, e.v, e.w);
        return ok_;
    }

    [[nodiscard]] DtnSolution solution() const
    {
        DtnSolution s;
        for (std::size_t i = 0; i < vars_.size(); ++i)
            s.assignment.emplace(vars_[i], -matrix_.at(i + 1, 0));
        return s;
    }

private:
    [[nodiscard]] std::size_t node(TimepointId id) const
    {
        auto it = index_.find(id.index);
        if (it == index_.end())
            throw std::invalid_argument("conjunct mentions timepoint " + std::to_string(id.index) +
                                        " which is not a DTN variable");
        return it->second;
    }

    DistanceMatrix matrix_;
    std::unordered_map<std::uint32_t, std::size_t> index_;
    std::vector<TimepointId> vars_;
    bool ok_ = true;
};

class DtnSearch {
public:
    DtnSearch(const DtnProblem& p) : problem_(p) {}

    std::optional<DtnSolution> run()
    {
        Network net(problem_.variables, problem_.floor);
        if (!net.ok())
            return std::nullopt;
        // Disjuncts already holding a True literal impose nothing.
        for (const auto& d : problem_.disjuncts) {
            bool satisfied = std::any_of(d.conjuncts.begin(), d.conjuncts.end(),
                                         [](const Conjunct& c) { return c.kind == Conjunct::Kind::True; });
            if (!satisfied)
                open_.push_back(&d);
        }
        std::vector<bool> assigned(open_.size(), false);
        return dfs(std::move(net), std::move(assigned));
    }

private:
    /// Forces disjuncts left with a single admissible conjunct; false on a wipe-out.
    bool propagate(Network& net, std::vector<bool>& assigned) const
    {
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t k = 0; k < open_.size(); ++k) {
                if (assigned[k])
                    continue;
                const Conjunct* only = nullptr;
                int admissible = 0;
                for (const auto& c : open_[k]->conjuncts) {
                    if (net.admits(c)) {
                        ++admissible;
                        only = &c;
                        if (admissible > 1)
                            break;
                    }
                }
                if (admissible == 0)
                    return false;
                if (admissible == 1) {
                    assigned[k] = true;
                    if (!net.add(*only))
                        return false;
                    changed = true;
                }
            }
        }
        return true;
    }

    std::optional<DtnSolution> dfs(Network net, std::vector<bool> assigned) const
    {
        if (!propagate(net, assigned))
            return std::nullopt;
        auto next = std::find(assigned.begin(), assigned.end(), false);
        if (next == assigned.end())
            return net.solution();
        const auto k = static_cast<std::size_t>(next - assigned.begin());
        for (const auto& c : open_[k]->conjuncts) {
            if (!net.admits(c))
                continue;
            Network branch = net;
            auto branch_assigned = assigned;
            branch_assigned[k] = true;
            if (!branch.add(c))
                continue;
            if (auto s = dfs(std::move(branch), std::move(branch_assigned)))
                return s;
        }
        return std::nullopt;
    }

    const DtnProblem& problem_;
    std::vector<const Disjunct*> open_;
};

}  // namespace

std::optional<DtnSolution> stn_consistent(std::span<const Conjunct> conjuncts, std::span<const TimepointId> variables,
                                          const TimeValue& floor)
{
    if (!floor.is_finite())
        throw std::invalid_argument("DTN floor must be finite");
    Network net(variables, floor);
    for (const auto& c : conjuncts)
        if (!net.add(c))
            return std::nullopt;
    if (!net.ok())
        return std::nullopt;
    return net.solution();
}

std::optional<DtnSolution> solve_dtn(const DtnProblem& problem)
{
    if (!problem.floor.is_finite())
        throw std::invalid_argument("DTN floor must be finite");
    return DtnSearch(problem).run();
}

bool verify_dtn(const DtnProblem& problem, const DtnSolution& solution)
{
    auto value = [&](TimepointId id) -> std::optional<TimeValue> {
        auto it = solution.assignment.find(id);
        if (it == solution.assignment.end())
            return std::nullopt;
        return it->second;
    };
    for (auto v : problem.variables) {
        auto x = value(v);
        if (!x || *x < problem.floor)
            return false;
    }
    for (const auto& d : problem.disjuncts) {
        bool holds = false;
        for (const auto& c : d.conjuncts) {
            switch (c.kind) {
            case Conjunct::Kind::True:
                holds = true;
                break;
            case Conjunct::Kind::False:
                break;
            case Conjunct::Kind::Bounded: {
                auto x = value(c.to);
                holds = x && c.lb <= *x && *x <= c.ub;
                break;
            }
            case Conjunct::Kind::Distance: {
                auto a = value(c.to);
                auto b = value(c.from);
                holds = a && b && c.lb <= *a - *b && *a - *b <= c.ub;
                break;
            }
            }
            if (holds)
                break;
        }
        if (!holds)
            return false;
    }
    return true;
}

}  // namespace rtdc
