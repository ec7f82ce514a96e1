#include "rtdc/search.hpp"
#include "rtdc/strategy.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace rtdc;
using test::dist;
using test::T;
using test::within;

namespace {

struct ReactiveWindow {
    test::Builder b;
    TimepointId a1 = b.ctrl("a1");
    TimepointId a2 = b.ctrl("a2");
    TimepointId u1 = b.unc("u1");
    Dtnu d;

    ReactiveWindow()
    {
        b.link(a1, u1, {{T("2"), T("4")}});
        b.require({dist(u1, a2, T("0"), T("10"))});
        d = b.build();
    }
};

}  // namespace

TEST_CASE("extraction")
{
    ReactiveWindow f;
    auto v = check_rtdc(f.d);
    REQUIRE(v.strategy);
    const auto& s = *v.strategy;
    CHECK(s.start == T("0"));
    bool has_a1 = false;
    for (const auto& [tp, t] : s.executions)
        has_a1 = has_a1 || (tp == f.a1 && t == T("0"));
    CHECK(has_a1);

    TreeNode root;
    root.set_truth(Truth::False);
    CHECK_THROWS_AS(extract_strategy(f.d, root), NoStrategy);
}

TEST_CASE("AND branches all appear in the strategy")
{
    test::Builder b;
    auto a1 = b.ctrl("a1");
    auto a2 = b.ctrl("a2");
    auto u1 = b.unc("u1");
    b.link(a1, u1, {{T("0"), T("10")}});
    b.require({within(a1, T("0"), T("0"))});
    b.require({dist(a2, u1, T("0"), T("30")), within(a2, T("20"), T("30"))});
    b.require({within(a2, T("3"), T("40"))});
    Dtnu d = b.build();
    auto v = check_rtdc(d);
    REQUIRE(v.kind == Verdict::Kind::Rtdc);
    // Some wait must branch on u1.
    std::function<bool(const StrategyNode&)> branches = [&](const StrategyNode& n) {
        if (n.children.size() >= 2)
            return true;
        for (const auto& c : n.children)
            if (branches(c))
                return true;
        return false;
    };
    CHECK(branches(*v.strategy));
    CHECK(simulate_execution(d, *v.strategy, 500, 3).violations == 0);
}

TEST_CASE("hand-checked execution")
{
    ReactiveWindow f;
    auto v = check_rtdc(f.d);
    REQUIRE(v.strategy);
    OffsetDraw draw{{f.u1, T("3.7")}};
    auto trace = execute(f.d, *v.strategy, draw);
    CHECK(trace.occurrences.at(f.u1) == T("3.7"));
    const TimeValue gap = trace.occurrences.at(f.u1) - trace.executions.at(f.a2);
    CHECK(gap >= T("0"));
    CHECK(gap <= T("10"));
    CHECK_FALSE(trace.violated());
}

TEST_CASE("deleting an execution is caught on every trace")
{
    ReactiveWindow f;
    auto v = check_rtdc(f.d);
    REQUIRE(v.strategy);
    StrategyNode broken = *v.strategy;
    std::function<void(StrategyNode&)> strip = [&](StrategyNode& n) {
        std::erase_if(n.executions, [&](const auto& e) { return e.first == f.a2; });
        for (auto& r : n.reactive)
            std::erase(r.controllables, f.a2);
        for (auto& c : n.children)
            strip(c);
    };
    strip(broken);
    auto report = simulate_execution(f.d, broken, 100, 9);
    CHECK(report.violations == report.runs);
}

TEST_CASE("uncertainty-free problems run once")
{
    test::Builder b;
    auto a1 = b.ctrl("a1");
    b.require({within(a1, T("0"), T("5"))});
    Dtnu d = b.build();
    auto v = check_rtdc(d);
    REQUIRE(v.strategy);
    auto report = simulate_execution(d, *v.strategy, 1000, 1, true);
    CHECK(report.runs == 1);
    CHECK(report.traces.size() == 1);
    CHECK(report.violations == 0);
}

TEST_CASE("offset sampling")
{
    ContingencyLink single{{0}, {1}, {{T("2"), T("4")}}};
    ContingencyLink split{{0}, {1}, {{T("0"), T("1")}, {T("5"), T("6")}}};
    std::mt19937_64 rng(12);
    for (int i = 0; i < 2000; ++i) {
        auto x = sample_offset(single, rng);
        CHECK(x >= T("2"));
        CHECK(x <= T("4"));
        auto y = sample_offset(split, rng);
        CHECK(((y >= T("0") && y <= T("1")) || (y >= T("5") && y <= T("6"))));
    }
    ReactiveWindow f;
    CHECK(random_draw(f.d, 5) == random_draw(f.d, 5));
    auto corners = corner_draws(f.d);
    REQUIRE(corners.size() == 2);
    CHECK(corners[0].at(f.u1) == T("2"));
    CHECK(corners[1].at(f.u1) == T("4"));
}

TEST_CASE("strategy files round-trip")
{
    ReactiveWindow f;
    auto v = check_rtdc(f.d);
    REQUIRE(v.strategy);
    auto text = strategy_to_json(f.d, *v.strategy);
    CHECK(strategy_from_json(f.d, text) == *v.strategy);
    CHECK_THROWS_AS(strategy_from_json(f.d, "{"), MalformedStrategy);
}

TEST_CASE("uncovered outcomes and gaps are malformed")
{
    test::Builder b;
    auto a1 = b.ctrl("a1");
    auto a2 = b.ctrl("a2");
    auto u1 = b.unc("u1");
    b.link(a1, u1, {{T("0"), T("10")}});
    b.require({within(a1, T("0"), T("0"))});
    b.require({dist(a2, u1, T("0"), T("30")), within(a2, T("20"), T("30"))});
    b.require({within(a2, T("3"), T("40"))});
    Dtnu d = b.build();
    auto v = check_rtdc(d);
    REQUIRE(v.strategy);

    std::function<StrategyNode*(StrategyNode&)> find_branching = [&](StrategyNode& n) -> StrategyNode* {
        if (n.children.size() >= 2)
            return &n;
        for (auto& c : n.children)
            if (auto* x = find_branching(c))
                return x;
        return nullptr;
    };
    StrategyNode pruned = *v.strategy;
    auto* node = find_branching(pruned);
    REQUIRE(node != nullptr);
    node->children.pop_back();
    CHECK_THROWS_AS(simulate_execution(d, pruned, 200, 1), MalformedStrategy);

    StrategyNode gap = *v.strategy;
    node = find_branching(gap);
    node->children.front().start = node->children.front().start + T("1");
    CHECK_THROWS_AS(simulate_execution(d, gap, 200, 1), MalformedStrategy);
}

TEST_CASE("every sampled outcome follows exactly one path")
{
    std::mt19937_64 rng(31);
    for (int i = 0; i < 100; ++i) {
        Dtnu d = test::random_small_dtnu(rng);
        SearchConfig cfg;
        cfg.timeout = std::chrono::duration<double>(0);
        auto v = check_rtdc(d, cfg);
        if (v.kind != Verdict::Kind::Rtdc)
            continue;
        std::function<void(const StrategyNode&)> check_node = [&](const StrategyNode& n) {
            for (std::size_t x = 0; x < n.children.size(); ++x) {
                CHECK(n.children[x].start == *n.wait_end);
                for (std::size_t y = x + 1; y < n.children.size(); ++y)
                    CHECK(n.children[x].outcome != n.children[y].outcome);
                check_node(n.children[x]);
            }
        };
        check_node(*v.strategy);
        CHECK_NOTHROW(simulate_execution(d, *v.strategy, 100, 2));
    }
}
