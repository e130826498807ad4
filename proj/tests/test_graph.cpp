#include <gtest/gtest.h>

#include <algorithm>

#include "mixsem/graph.hpp"
#include "mixsem/random.hpp"
#include "mixsem/search.hpp"
#include "oracles.hpp"

using namespace mixsem;

namespace {

MixedGraph three_cycle() { return MixedGraph(3, {{1, 2}, {2, 3}, {3, 1}}, {}); }

}  // namespace

TEST(MixedGraph, RejectsSelfLoopsAndBadLabels) {
    MixedGraph g(3);
    EXPECT_THROW(g.add_directed(2, 2), ContractError);
    EXPECT_THROW(g.add_bidirected(1, 1), ContractError);
    EXPECT_THROW(g.add_directed(0, 1), ContractError);
    EXPECT_THROW(g.add_directed(1, 4), ContractError);
}

TEST(MixedGraph, BidirectedStorageIsNormalized) {
    MixedGraph g(3);
    g.add_bidirected(3, 1);
    EXPECT_TRUE(g.has_bidirected(1, 3));
    EXPECT_TRUE(g.has_bidirected(3, 1));
    EXPECT_EQ(*g.bidirected().begin(), (Pair{1, 3}));
}

TEST(IsSimple, Examples) {
    EXPECT_TRUE(is_simple(three_cycle()));
    EXPECT_FALSE(is_simple(MixedGraph(2, {{1, 2}}, {{1, 2}})));
    EXPECT_FALSE(is_simple(MixedGraph(2, {{1, 2}, {2, 1}}, {})));
    EXPECT_TRUE(is_simple(MixedGraph(5)));
}

TEST(Skeleton, Examples) {
    EXPECT_EQ(skeleton(three_cycle()).edges, (std::set<Pair>{{1, 2}, {2, 3}, {1, 3}}));
    EXPECT_TRUE(skeleton(MixedGraph(4)).edges.empty());
    EXPECT_EQ(skeleton(MixedGraph(2, {}, {{1, 2}})).edges, (std::set<Pair>{{1, 2}}));
}

TEST(ColliderTriples, Examples) {
    EXPECT_EQ(collider_triples(MixedGraph(3, {{1, 3}, {2, 3}}, {})).triples, (std::set<Triple>{{1, 3, 2}}));
    EXPECT_TRUE(collider_triples(three_cycle()).triples.empty());
    EXPECT_EQ(collider_triples(MixedGraph(3, {}, {{1, 2}, {2, 3}})).triples, (std::set<Triple>{{1, 2, 3}}));
    // Second graph of the two-graph example: 1->2, 1->3, 2->3 has collider (1,3,2).
    EXPECT_EQ(collider_triples(MixedGraph(3, {{1, 2}, {1, 3}, {2, 3}}, {})).triples, (std::set<Triple>{{1, 3, 2}}));
}

TEST(ColliderTriples, MatchesDefinitionOnAllGraphsP3) {
    for (const auto& g : oracle::all_mixed_graphs(3))
        EXPECT_EQ(collider_triples(g).triples, oracle::colliders_by_definition(g)) << g.to_string();
}

TEST(Markers, IndependentOfInsertionOrder) {
    MixedGraph a(4), b(4);
    a.add_directed(1, 2);
    a.add_bidirected(2, 3);
    a.add_directed(4, 3);
    b.add_directed(4, 3);
    b.add_bidirected(3, 2);
    b.add_directed(1, 2);
    EXPECT_EQ(a, b);
    EXPECT_EQ(skeleton(a), skeleton(b));
    EXPECT_EQ(collider_triples(a), collider_triples(b));
}

TEST(Neighborhood, Examples) {
    auto n0 = neighborhood(MixedGraph(2));
    ASSERT_EQ(n0.size(), 3u);
    EXPECT_EQ(n0[0], MixedGraph(2, {{1, 2}}, {}));
    EXPECT_EQ(n0[1], MixedGraph(2, {{2, 1}}, {}));
    EXPECT_EQ(n0[2], MixedGraph(2, {}, {{1, 2}}));

    auto n1 = neighborhood(MixedGraph(2, {{1, 2}}, {}));
    ASSERT_EQ(n1.size(), 2u);
    EXPECT_EQ(n1[0], MixedGraph(2));
    EXPECT_EQ(n1[1], MixedGraph(2, {{2, 1}}, {}));

    // Three deletions and three reversals; no pair is empty.
    EXPECT_EQ(neighborhood(three_cycle()).size(), 6u);
}

TEST(Neighborhood, RejectsNonSimple) {
    EXPECT_THROW(neighborhood(MixedGraph(2, {{1, 2}}, {{1, 2}})), ContractError);
}

TEST(Neighborhood, MatchesMoveOracleAndIsReversible) {
    for (int p : {2, 3}) {
        auto graphs = oracle::all_simple_graphs(p);
        for (const auto& g : graphs) {
            auto nb = neighborhood(g);
            std::vector<std::string> got, want;
            for (const auto& h : nb) {
                EXPECT_TRUE(is_simple(h));
                EXPECT_NE(h, g);
                got.push_back(h.key());
                auto back = neighborhood(h);
                EXPECT_TRUE(std::find(back.begin(), back.end(), g) != back.end());
            }
            for (const auto& h : graphs)
                if (oracle::one_move_apart(g, h)) want.push_back(h.key());
            std::sort(want.begin(), want.end());
            EXPECT_EQ(got, want) << g.to_string();
        }
    }
}

TEST(Shd, Examples) {
    MixedGraph fwd(2, {{1, 2}}, {}), rev(2, {{2, 1}}, {}), bi(2, {}, {{1, 2}});
    EXPECT_EQ(shd(three_cycle(), three_cycle()), 0);
    EXPECT_EQ(shd(fwd, rev), 1);
    EXPECT_EQ(shd(fwd, bi), 2);
    EXPECT_EQ(shd(fwd, MixedGraph(2)), 1);
    EXPECT_THROW(shd(fwd, MixedGraph(3)), ContractError);
}

TEST(Shd, EqualsShortestMovePath) {
    for (int p : {2, 3}) {
        auto graphs = oracle::all_simple_graphs(p);
        // All sources for p=2; a spread of sources for p=3.
        for (std::size_t s = 0; s < graphs.size(); s += (p == 2 ? 1 : 7)) {
            auto dist = oracle::bfs_move_distances(graphs[s]);
            ASSERT_EQ(dist.size(), graphs.size());
            for (const auto& h : graphs) EXPECT_EQ(shd(graphs[s], h), dist.at(h.key()));
        }
    }
}

TEST(Shd, IsAMetricOnRandomGraphs) {
    Rng rng = substream(11);
    for (int rep = 0; rep < 300; ++rep) {
        const int p = 2 + rep % 4;
        auto a = random_simple_graph(p, rng), b = random_simple_graph(p, rng), c = random_simple_graph(p, rng);
        EXPECT_EQ(shd(a, b), shd(b, a));
        EXPECT_EQ(shd(a, b) == 0, a == b);
        EXPECT_LE(shd(a, c), shd(a, b) + shd(b, c));
    }
}

TEST(MarkerClass, Examples) {
    Skeleton triangle{3, {{1, 2}, {1, 3}, {2, 3}}};
    auto cycles = marker_class(triangle, {});
    ASSERT_EQ(cycles.size(), 2u);
    EXPECT_EQ(cycles[0], three_cycle());
    EXPECT_EQ(cycles[1], MixedGraph(3, {{1, 3}, {3, 2}, {2, 1}}, {}));

    auto empty = marker_class(Skeleton{4, {}}, {});
    ASSERT_EQ(empty.size(), 1u);
    EXPECT_EQ(empty[0], MixedGraph(4));

    auto single = marker_class(Skeleton{2, {{1, 2}}}, {});
    EXPECT_EQ(single.size(), 3u);
}

TEST(MarkerClass, CapIsEnforced) {
    Skeleton s{6, {}};
    for (auto pr : vertex_pairs(6)) s.edges.insert(pr);
    EXPECT_THROW(marker_class(s, {}), EnumerationTooLarge);
    EXPECT_NO_THROW(marker_class(Skeleton{5, {{1, 2}}}, {}, 1));
}

TEST(MarkerClass, MatchesBruteForce) {
    Rng rng = substream(5);
    for (int rep = 0; rep < 40; ++rep) {
        const int p = rep < 20 ? 3 : 4;
        auto g = random_simple_graph(p, rng);
        auto got = marker_class(skeleton(g), collider_triples(g));
        auto want = oracle::marker_class_brute(g);
        std::sort(want.begin(), want.end(), canonical_less);
        EXPECT_EQ(got, want) << g.to_string();
        // Every member has the same class.
        for (const auto& h : got) EXPECT_EQ(marker_class(skeleton(h), collider_triples(h)).size(), got.size());
    }
}

TEST(ShdStar, Examples) {
    MixedGraph dag(3, {{1, 2}, {1, 3}, {2, 3}}, {});
    EXPECT_EQ(shd_star(three_cycle(), dag), 1);
    MixedGraph reversed(3, {{2, 1}, {3, 2}, {1, 3}}, {});
    EXPECT_EQ(shd(three_cycle(), reversed), 3);
    EXPECT_EQ(shd_star(three_cycle(), reversed), 0);
}

TEST(ShdStar, BoundedByShdAndSymmetric) {
    Rng rng = substream(8);
    for (int rep = 0; rep < 100; ++rep) {
        const int p = 3 + rep % 3;
        auto a = random_simple_graph(p, rng), b = random_simple_graph(p, rng);
        const int s = shd_star(a, b);
        EXPECT_LE(s, shd(a, b));
        EXPECT_EQ(s, shd_star(b, a));
        if (same_markers(a, b)) EXPECT_EQ(s, 0);
    }
}

TEST(DescribeMove, NamesTheChange) {
    MixedGraph a(3, {{1, 2}}, {});
    EXPECT_EQ(describe_move(MixedGraph(3), a), "add 1->2");
    EXPECT_EQ(describe_move(a, MixedGraph(3)), "remove 1->2");
    EXPECT_EQ(describe_move(a, MixedGraph(3, {{2, 1}}, {})), "reverse 1->2");
    EXPECT_EQ(describe_move(MixedGraph(3), MixedGraph(3, {}, {{2, 3}})), "add 2<->3");
}
