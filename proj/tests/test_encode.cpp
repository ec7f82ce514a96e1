#include "rtdc/encode.hpp"
#include "support.hpp"
#include "walk.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

using namespace rtdc;
using test::dist;
using test::T;
using test::within;

namespace {

std::size_t node_type(const GraphEncoding& g, std::size_t i)
{
    const auto& f = g.node_features[i];
    return static_cast<std::size_t>(std::find(f.begin(), f.end(), 1.0F) - f.begin());
}

const GraphEdge* edge_between(const GraphEncoding& g, std::size_t a, std::size_t b)
{
    for (const auto& e : g.edges)
        if ((e.i == a && e.j == b) || (e.i == b && e.j == a))
            return &e;
    return nullptr;
}

int lb_class(const GraphEdge& e)
{
    return static_cast<int>(std::find(e.features.begin(), e.features.begin() + 10, 1.0F) - e.features.begin());
}

int ub_class(const GraphEdge& e)
{
    return static_cast<int>(std::find(e.features.begin() + 10, e.features.begin() + 20, 1.0F) -
                            (e.features.begin() + 10));
}

bool has_type(const GraphEdge& e, EdgeType t) { return e.features[20 + static_cast<std::size_t>(t)] == 1.0F; }

}  // namespace

TEST_CASE("distance classes")
{
    CHECK(distance_class(0.0) == 0);
    CHECK(distance_class(0.05) == 0);
    CHECK(distance_class(0.1) == 1);
    CHECK(distance_class(0.15) == 1);
    CHECK(distance_class(0.9) == 9);
    CHECK(distance_class(0.99) == 9);
    CHECK(distance_class(1.0) == 9);
    CHECK_THROWS_AS(distance_class(-0.01), OutOfRange);
    CHECK_THROWS_AS(distance_class(1.01), OutOfRange);
    CHECK_THROWS_AS(distance_class(std::nan("")), OutOfRange);

    CHECK(distance_class(T("12"), T("80")) == 1);
    CHECK(distance_class(T("80"), T("80")) == 9);
    CHECK(distance_class(T("-8"), T("80")) == 1);
    CHECK(distance_class(T("7.99"), T("80")) == 0);
    CHECK_THROWS_AS(distance_class(T("81"), T("80")), OutOfRange);
}

TEST_CASE("two controllables, one uncontrollable, one constraint")
{
    test::Builder b;
    auto a1 = b.ctrl("a1");
    auto a2 = b.ctrl("a2");
    auto u = b.unc("u");
    b.link(a1, u, {{T("2"), T("4")}});
    b.require({dist(u, a2, T("0"), T("10"))});
    Dtnu d = b.build();

    auto g = to_graph(d, initial_state(d));
    REQUIRE(g.num_nodes() == 5);
    CHECK(g.d_max == T("10"));
    CHECK(node_type(g, 0) == 0);
    CHECK(node_type(g, 1) == 0);
    CHECK(node_type(g, 2) == 1);
    CHECK(node_type(g, 3) == 4);
    CHECK(node_type(g, 4) == 2);
    REQUIRE(g.active.size() == 3);
    CHECK(g.active[0].choice == Action::schedule(a1));
    CHECK(g.active[1].choice == Action::schedule(a2));
    CHECK(g.active[2].choice == Action::wait_action());
    CHECK(g.edges.size() == 3);

    const auto* link = edge_between(g, 0, 2);
    REQUIRE(link);
    CHECK(has_type(*link, EdgeType::Contingency));
    const auto* into_u = edge_between(g, 4, 2);
    REQUIRE(into_u);
    CHECK(has_type(*into_u, EdgeType::Constraint));
    CHECK(lb_class(*into_u) == 0);
    CHECK(ub_class(*into_u) == 9);
    CHECK(into_u->features[23] == 0.0F);
    const auto* from_a2 = edge_between(g, 4, 1);
    REQUIRE(from_a2);
    CHECK(lb_class(*from_a2) == 9);
    CHECK(ub_class(*from_a2) == 0);
    CHECK(from_a2->features[23] == 1.0F);
    CHECK(from_a2->features[24] == 0.0F);

    // Once a1 runs, u hangs off WAIT through its activation window.
    auto s = after_schedule(d, initial_state(d), a1);
    auto h = to_graph(d, s);
    CHECK(h.num_nodes() == 4);
    REQUIRE(h.active.size() == 2);
    const std::size_t u_node = 1, wait_node = 2;
    CHECK(node_type(h, u_node) == 1);
    CHECK(node_type(h, wait_node) == 4);
    const auto* window = edge_between(h, u_node, wait_node);
    REQUIRE(window);
    CHECK(has_type(*window, EdgeType::Contingency));
    CHECK(lb_class(*window) == 2);
    CHECK(ub_class(*window) == 4);
}

TEST_CASE("horizon and normalization")
{
    test::Builder b;
    auto a1 = b.ctrl("a1");
    auto a2 = b.ctrl("a2");
    b.require({within(a1, T("5"), T("80"))});
    b.require({within(a2, T("12"), T("12"))});
    Dtnu d = b.build();
    auto g = to_graph(d, initial_state(d));
    CHECK(g.d_max == T("80"));
    // Node 4 is the second disjunct's hub; its edge to a2 carries 12/80.
    const auto* e = edge_between(g, 4, 1);
    REQUIRE(e);
    CHECK(lb_class(*e) == 1);
    CHECK(ub_class(*e) == 1);

    auto later = initial_state(d);
    later.time = T("5");
    auto h = to_graph(d, later);
    CHECK(h.d_max == T("75"));
}

TEST_CASE("multi-conjunct disjuncts get conjunct hubs")
{
    test::Builder b;
    auto a1 = b.ctrl("a1");
    b.require({within(a1, T("0"), T("5")), within(a1, T("20"), T("30"))});
    Dtnu d = b.build();
    auto g = to_graph(d, initial_state(d));
    // a1, WAIT, disjunct hub, two conjunct hubs
    REQUIRE(g.num_nodes() == 5);
    CHECK(node_type(g, 2) == 2);
    CHECK(node_type(g, 3) == 3);
    CHECK(node_type(g, 4) == 3);
    CHECK(g.edges.size() == 6);
    for (std::size_t q : {3, 4}) {
        const auto* m = edge_between(g, 2, q);
        REQUIRE(m);
        CHECK(has_type(*m, EdgeType::Membership));
        CHECK(std::accumulate(m->features.begin(), m->features.begin() + 20, 0.0F) == 0.0F);
        CHECK(edge_between(g, q, 0));
        CHECK(edge_between(g, q, 1));
    }
}

TEST_CASE("unbounded and degenerate bounds")
{
    test::Builder b;
    auto a1 = b.ctrl("a1");
    auto a2 = b.ctrl("a2");
    b.require({within(a1, T("0"), TimeValue::infinity())});
    b.require({within(a2, T("0"), T("10"))});
    Dtnu d = b.build();
    auto g = to_graph(d, initial_state(d));
    const auto* e = edge_between(g, 3, 0);
    REQUIRE(e);
    CHECK(e->features[25] == 1.0F);
    CHECK(ub_class(*e) == 9);
    const auto* f = edge_between(g, 4, 1);
    REQUIRE(f);
    CHECK(f->features[25] == 0.0F);

    test::Builder z;
    auto c = z.ctrl("c");
    z.require({within(c, T("0"), T("0"))});
    Dtnu dz = z.build();
    CHECK_THROWS_AS(to_graph(dz, initial_state(dz)), DegenerateHorizon);

    test::Builder inf;
    auto x = inf.ctrl("x");
    inf.require({within(x, TimeValue::neg_infinity(), TimeValue::infinity())});
    Dtnu di = inf.build();
    CHECK_THROWS_AS(to_graph(di, initial_state(di)), DegenerateHorizon);
}

TEST_CASE("encoding invariants on reachable states")
{
    std::mt19937_64 rng(17);
    int encoded = 0;
    for (int i = 0; i < 400; ++i) {
        Dtnu d = test::random_small_dtnu(rng);
        auto s = test::random_state(d, rng, static_cast<int>(rng() % 4));
        GraphEncoding g;
        try {
            g = to_graph(d, s);
        } catch (const DegenerateHorizon&) {
            // Only legitimate when nothing left to encode carries a nonzero finite time.
            auto zero = [&](const TimeValue& v) { return !v.is_finite() || v == s.time; };
            for (std::size_t k = 0; k < s.constraints.num_disjuncts(); ++k) {
                if (s.constraints.disjunct_satisfied(k))
                    continue;
                for (const auto& c : s.constraints.disjunct(k)) {
                    if (c.kind == Conjunct::Kind::Bounded)
                        CHECK((zero(c.lb) && zero(c.ub)));
                    if (c.kind == Conjunct::Kind::Distance)
                        CHECK(((!c.lb.is_finite() || c.lb == TimeValue(0)) &&
                               (!c.ub.is_finite() || c.ub == TimeValue(0))));
                }
            }
            for (const auto& [u, support] : s.windows)
                for (const auto& iv : support)
                    CHECK((zero(max(iv.lo, s.time)) && zero(iv.hi)));
            continue;
        }
        ++encoded;
        CHECK(g == to_graph(d, s));

        for (const auto& f : g.node_features) {
            CHECK(f.size() == kNodeFeatureDim);
            CHECK(std::count(f.begin(), f.end(), 1.0F) == 1);
        }
        std::set<std::pair<std::size_t, std::size_t>> pairs;
        for (const auto& e : g.edges) {
            CHECK(e.i < e.j);
            CHECK(pairs.emplace(e.i, e.j).second);
            REQUIRE(e.features.size() == kEdgeFeatureDim);
            for (float x : e.features)
                CHECK((x == 0.0F || x == 1.0F));
            CHECK(std::count(e.features.begin() + 20, e.features.begin() + 23, 1.0F) == 1);
            const auto classes = std::count(e.features.begin(), e.features.begin() + 20, 1.0F);
            CHECK(classes == (has_type(e, EdgeType::Membership) ? 0 : 2));
        }
        const auto adj = g.adjacency();
        for (std::size_t a = 0; a < g.num_nodes(); ++a) {
            CHECK(adj[a][a] == 0);
            for (std::size_t c = 0; c < g.num_nodes(); ++c)
                CHECK(adj[a][c] == adj[c][a]);
        }

        const auto free = unscheduled(d, s);
        REQUIRE(g.active.size() == free.size() + 1);
        for (std::size_t k = 0; k < free.size(); ++k) {
            CHECK(g.active[k].choice == Action::schedule(free[k]));
            CHECK(node_type(g, g.active[k].node) == 0);
        }
        CHECK(g.active.back().choice.wait);
        CHECK(node_type(g, g.active.back().node) == 4);

        auto back = graph_from_json(d, nlohmann::json::parse(graph_to_json(d, g).dump()));
        back.d_max = g.d_max;
        CHECK(back == g);
    }
    CHECK(encoded > 200);
}

TEST_CASE("relabeling timepoints gives an isomorphic graph")
{
    std::mt19937_64 rng(23);
    for (int i = 0; i < 200; ++i) {
        Dtnu d = test::random_small_dtnu(rng);
        std::vector<std::uint32_t> perm(d.size());
        std::iota(perm.begin(), perm.end(), 0U);
        std::shuffle(perm.begin(), perm.end(), rng);
        Dtnu r = test::relabel(d, perm);

        auto s = initial_state(d);
        auto sr = initial_state(r);
        if (rng() % 2 == 0) {
            auto a = d.controllables().front();
            s = after_schedule(d, s, a);
            sr = after_schedule(r, sr, TimepointId{perm[a.index]});
        }
        GraphEncoding g, gr;
        try {
            g = to_graph(d, s);
        } catch (const DegenerateHorizon&) {
            CHECK_THROWS_AS(to_graph(r, sr), DegenerateHorizon);
            continue;
        }
        gr = to_graph(r, sr);
        auto sig = test::signatures(g);
        auto sig_r = test::signatures(gr);
        REQUIRE(g.active.size() == gr.active.size());
        for (const auto& a : g.active) {
            const auto match = std::find_if(gr.active.begin(), gr.active.end(), [&](const ActiveNode& b) {
                return a.choice.wait ? b.choice.wait : (!b.choice.wait && d.name(a.choice.tp) == r.name(b.choice.tp));
            });
            REQUIRE(match != gr.active.end());
            CHECK(sig[a.node] == sig_r[match->node]);
        }
        std::sort(sig.begin(), sig.end());
        std::sort(sig_r.begin(), sig_r.end());
        CHECK(sig == sig_r);
    }
}
