#include "rtdc/gen.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

namespace rtdc {

void GeneratorConfig::validate() const
{
    if (n1_min < 1 || n1_max < n1_min || n2_min < 0 || n2_max < n2_min)
        throw std::invalid_argument("empty timepoint count range");
    if (n2_max > n1_min)
        throw std::invalid_argument("more uncontrollables than controllables to link them to");
    if (bound_max < 0 || max_conjuncts < 1)
        throw std::invalid_argument("empty bound or conjunct range");
    if (!(extra_disjunct_prob >= 0.0 && extra_disjunct_prob <= 1.0))
        throw std::invalid_argument("probability outside [0, 1]");
}

void LabelingConfig::validate() const
{
    if (nu < 1)
        throw std::invalid_argument("nu must be at least 1");
    if (!(tau.count() > 0.0))
        throw std::invalid_argument("tau must be positive");
}

Dtnu generate_dtnu(const GeneratorConfig& cfg)
{
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto bound = [&] { return TimeValue(pick(0, cfg.bound_max * 100), 100); };
    auto interval = [&] {
        TimeValue x = bound(), y = bound();
        if (y < x)
            std::swap(x, y);
        return Interval{x, y};
    };

    const int n1 = pick(cfg.n1_min, cfg.n1_max);
    const int n2 = pick(cfg.n2_min, cfg.n2_max);
    std::vector<Timepoint> tps;
    for (int i = 1; i <= n1; ++i)
        tps.push_back({"a" + std::to_string(i), TimepointKind::Controllable});
    for (int i = 1; i <= n2; ++i)
        tps.push_back({"u" + std::to_string(i), TimepointKind::Uncontrollable});
    const auto n = static_cast<std::uint32_t>(tps.size());

    std::set<std::uint32_t> appearing;
    std::vector<std::uint32_t> sources(static_cast<std::size_t>(n1));
    for (int i = 0; i < n1; ++i)
        sources[static_cast<std::size_t>(i)] = static_cast<std::uint32_t>(i);
    std::shuffle(sources.begin(), sources.end(), rng);
    std::vector<ContingencyLink> links;
    for (int k = 0; k < n2; ++k) {
        const TimepointId a{sources[static_cast<std::size_t>(k)]};
        const TimepointId u{static_cast<std::uint32_t>(n1 + k)};
        links.push_back({a, u, {interval()}});
        appearing.insert(a.index);
        appearing.insert(u.index);
    }

    auto conjunct_on = [&](std::uint32_t v) {
        const Interval iv = interval();
        appearing.insert(v);
        if (n > 1 && pick(0, 1) == 0) {
            std::uint32_t w = v;
            while (w == v)
                w = static_cast<std::uint32_t>(pick(0, static_cast<int>(n) - 1));
            appearing.insert(w);
            return Conjunct::distance(TimepointId{v}, TimepointId{w}, iv.lo, iv.hi);
        }
        return Conjunct::bounded(TimepointId{v}, iv.lo, iv.hi);
    };

    std::bernoulli_distribution extra(cfg.extra_disjunct_prob);
    std::vector<Disjunct> constraints;
    for (std::uint32_t v = 0; v < n; ++v) {
        if (appearing.contains(v) && !extra(rng))
            continue;
        Disjunct disj;
        const int k = pick(1, cfg.max_conjuncts);
        disj.conjuncts.push_back(conjunct_on(v));
        for (int q = 1; q < k; ++q)
            disj.conjuncts.push_back(conjunct_on(static_cast<std::uint32_t>(pick(0, static_cast<int>(n) - 1))));
        constraints.push_back(std::move(disj));
    }
    return Dtnu(std::move(tps), std::move(constraints), std::move(links));
}

namespace {

std::uint64_t mix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

TrainingExample label_instance(const Dtnu& d, const LabelingConfig& cfg, std::uint64_t seed, const Explorer& explore)
{
    cfg.validate();
    const Explorer run = explore ? explore : [](const Dtnu& p, const SearchConfig& c) { return check_rtdc(p, c); };

    TrainingExample ex;
    ex.seed = seed;
    const DtnuState root = initial_state(d);
    ex.graph = to_graph(d, root);
    const auto children = baseline_actions(d, root);
    for (std::size_t c = 0; c < children.size(); ++c) {
        Label label;
        for (const auto& a : ex.graph.active)
            if (a.choice == children[c])
                label.node = a.node;
        label.timeout = true;
        for (int r = 0; r < cfg.nu; ++r) {
            SearchConfig sc;
            sc.timeout = std::isinf(cfg.tau.count()) ? std::chrono::duration<double>(0) : cfg.tau;
            sc.child_order = SearchConfig::ChildOrder::Random;
            sc.seed = mix(mix(mix(cfg.seed) ^ seed) ^ (c << 20 | static_cast<std::uint64_t>(r)));
            sc.root_action = children[c];
            const Verdict v = run(d, sc);
            ++label.runs;
            if (v.kind == Verdict::Kind::Timeout)
                continue;
            label.y = v.kind == Verdict::Kind::Rtdc ? 1 : 0;
            label.timeout = false;
            break;
        }
        ex.labels.push_back(label);
    }
    return ex;
}

nlohmann::json example_to_json(const Dtnu& d, const TrainingExample& ex)
{
    nlohmann::json j = graph_to_json(d, ex.graph);
    nlohmann::json labels = nlohmann::json::array();
    for (const auto& l : ex.labels)
        labels.push_back({{"node", l.node}, {"y", l.y}, {"timeout", l.timeout}});
    j["labels"] = std::move(labels);
    j["seed"] = ex.seed;
    return j;
}

}  // namespace rtdc
