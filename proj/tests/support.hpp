#pragma once

#include "rtdc/model.hpp"

#include <random>
#include <string>
#include <utility>
#include <vector>

namespace rtdc::test {

inline TimeValue T(const char* text) { return TimeValue::parse(text); }

inline Conjunct dist(TimepointId to, TimepointId from, TimeValue lb, TimeValue ub)
{
    return Conjunct::distance(to, from, lb, ub);
}

inline Conjunct within(TimepointId tp, TimeValue lb, TimeValue ub) { return Conjunct::bounded(tp, lb, ub); }

class Builder {
public:
    TimepointId ctrl(std::string name) { return add(std::move(name), TimepointKind::Controllable); }
    TimepointId unc(std::string name) { return add(std::move(name), TimepointKind::Uncontrollable); }

    Builder& link(TimepointId a, TimepointId u, std::vector<Interval> intervals)
    {
        links_.push_back({a, u, std::move(intervals)});
        return *this;
    }
    Builder& require(std::vector<Conjunct> disjunct)
    {
        constraints_.push_back({std::move(disjunct)});
        return *this;
    }
    [[nodiscard]] Dtnu build() const { return Dtnu(tps_, constraints_, links_); }

private:
    TimepointId add(std::string name, TimepointKind kind)
    {
        tps_.push_back({std::move(name), kind});
        return {static_cast<std::uint32_t>(tps_.size() - 1)};
    }

    std::vector<Timepoint> tps_;
    std::vector<Disjunct> constraints_;
    std::vector<ContingencyLink> links_;
};

/// Small random DTNU: 1-2 controllables, 0-2 uncontrollables (at most 4
/// timepoints), integer bounds in [0, 10], 1-3 disjuncts of 1-2 conjuncts.
inline Dtnu random_small_dtnu(std::mt19937_64& rng)
{
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    Builder b;
    std::vector<TimepointId> ctrls, all;
    const int nc = pick(1, 2);
    const int nu = pick(0, std::min(2, nc));
    for (int i = 0; i < nc; ++i)
        ctrls.push_back(b.ctrl("a" + std::to_string(i + 1)));
    all = ctrls;
    for (int i = 0; i < nu; ++i) {
        auto u = b.unc("u" + std::to_string(i + 1));
        int lo = pick(0, 5);
        b.link(ctrls[static_cast<std::size_t>(i)], u, {{TimeValue(lo), TimeValue(lo + pick(0, 4))}});
        all.push_back(u);
    }
    const int nd = pick(1, 3);
    for (int k = 0; k < nd; ++k) {
        std::vector<Conjunct> disj;
        const int nq = pick(1, 2);
        for (int q = 0; q < nq; ++q) {
            auto v = all[static_cast<std::size_t>(pick(0, static_cast<int>(all.size()) - 1))];
            int x = pick(0, 10), y = pick(0, 10);
            if (x > y)
                std::swap(x, y);
            if (all.size() > 1 && pick(0, 1) == 0) {
                auto w = v;
                while (w == v)
                    w = all[static_cast<std::size_t>(pick(0, static_cast<int>(all.size()) - 1))];
                int sx = pick(-6, 6), sy = pick(-6, 6);
                if (sx > sy)
                    std::swap(sx, sy);
                disj.push_back(dist(v, w, TimeValue(sx), TimeValue(sy)));
            } else {
                disj.push_back(within(v, TimeValue(x), TimeValue(y)));
            }
        }
        b.require(disj);
    }
    return b.build();
}

}  // namespace rtdc::test
