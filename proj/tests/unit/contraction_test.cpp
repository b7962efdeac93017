#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "clauseviz/contraction.hpp"
#include "support.hpp"

using namespace clauseviz;

namespace {

WeightedGraph from_edges(std::size_t n, std::initializer_list<std::tuple<NodeId, NodeId, double>> edges) {
    WeightedGraph g(n);
    for (auto [u, v, w] : edges) g.add_weight(u, v, w);
    return g;
}

WeightedGraph two_triangles() {
    return from_edges(6, {{0, 1, 1}, {1, 2, 1}, {0, 2, 1}, {3, 4, 1}, {4, 5, 1}, {3, 5, 1}, {2, 3, 1}});
}

/// Two cliques of size a and b joined by one edge of weight `bridge`.
WeightedGraph two_cliques(std::size_t a, std::size_t b, double bridge) {
    WeightedGraph g(a + b);
    for (NodeId i = 0; i < a; ++i)
        for (NodeId j = i + 1; j < a; ++j) g.add_weight(i, j, 1.0);
    for (NodeId i = 0; i < b; ++i)
        for (NodeId j = i + 1; j < b; ++j) g.add_weight(static_cast<NodeId>(a) + i, static_cast<NodeId>(a) + j, 1.0);
    g.add_weight(static_cast<NodeId>(a - 1), static_cast<NodeId>(a), bridge);
    return g;
}

std::size_t distinct(const std::vector<NodeId>& labels) { return std::set<NodeId>(labels.begin(), labels.end()).size(); }

/// Straightforward propagation with smallest-label tie-break, from an edge list.
std::vector<NodeId> reference_round(const WeightedGraph& g, std::vector<NodeId> labels, const std::vector<NodeId>& order,
                                    bool weighted) {
    const auto edges = g.edges();
    for (NodeId v : order) {
        std::map<NodeId, double> votes;
        for (const Edge& e : edges) {
            if (e.u == v) votes[labels[e.v]] += weighted ? e.weight : 1.0;
            if (e.v == v) votes[labels[e.u]] += weighted ? e.weight : 1.0;
        }
        if (votes.empty()) continue;
        NodeId best = votes.begin()->first;
        for (auto [l, s] : votes) {
            if (s > votes[best]) best = l;
        }
        labels[v] = best;
    }
    return labels;
}

double intra_weight(const WeightedGraph& g, const std::vector<NodeId>& map) {
    double sum = 0;
    for (const Edge& e : g.edges()) {
        if (map[e.u] == map[e.v]) sum += e.weight;
    }
    return sum;
}

}  // namespace

TEST(Propagation, TwoTrianglesSplitIntoTwoLabels) {
    const WeightedGraph g = two_triangles();
    const Adjacency adj = Adjacency::from(g);
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        std::vector<NodeId> labels(6);
        std::iota(labels.begin(), labels.end(), 0u);
        for (int r = 0; r < 10 && propagate_round(adj, labels, rng) > 0; ++r) {
        }
        const bool split = distinct(labels) == 2 && labels[0] == labels[1] && labels[1] == labels[2] &&
                           labels[3] == labels[4] && labels[4] == labels[5];
        ok += split;
    }
    EXPECT_GE(ok, 95);
}

TEST(Propagation, SingleEdgeMergesInEitherOrder) {
    const Adjacency adj = Adjacency::from(from_edges(2, {{0, 1, 1}}));
    for (auto order : {std::vector<NodeId>{0, 1}, std::vector<NodeId>{1, 0}}) {
        for (auto tb : {TieBreak::SmallestLabel, TieBreak::KeepCurrentThenRandom}) {
            std::vector<NodeId> labels{0, 1};
            Rng rng(1);
            propagate_round(adj, labels, order, rng, {VoteMode::Weighted, tb});
            EXPECT_EQ(labels[0], labels[1]);
        }
    }
}

TEST(Propagation, IsolatedNodesKeepLabels) {
    const Adjacency adj = Adjacency::from(WeightedGraph(3));
    std::vector<NodeId> labels{0, 1, 2};
    Rng rng(3);
    EXPECT_EQ(propagate_round(adj, labels, rng), 0u);
    EXPECT_EQ(labels, (std::vector<NodeId>{0, 1, 2}));
}

TEST(Propagation, SmallestLabelMatchesReference) {
    std::mt19937_64 gen(91);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + gen() % 25;
        WeightedGraph g(n);
        for (int i = 0; i < static_cast<int>(n) * 2; ++i) {
            g.add_weight(gen() % n, gen() % n, static_cast<double>(1 + gen() % 3) * 0.5);
        }
        const Adjacency adj = Adjacency::from(g);
        std::vector<NodeId> labels(n);
        std::iota(labels.begin(), labels.end(), 0u);
        for (NodeId& l : labels) l = static_cast<NodeId>(gen() % n);
        std::vector<NodeId> order(n);
        std::iota(order.begin(), order.end(), 0u);
        std::shuffle(order.begin(), order.end(), gen);
        for (bool weighted : {true, false}) {
            auto expected = reference_round(g, labels, order, weighted);
            auto got = labels;
            Rng rng(0);
            propagate_round(adj, got, order, rng,
                            {weighted ? VoteMode::Weighted : VoteMode::Count, TieBreak::SmallestLabel});
            ASSERT_EQ(got, expected) << "trial " << trial;
        }
    }
}

TEST(Propagation, LabelsStayValidNodeIds) {
    std::mt19937_64 gen(4);
    WeightedGraph g(50);
    for (int i = 0; i < 120; ++i) g.add_weight(gen() % 50, gen() % 50, 1.0);
    const Adjacency adj = Adjacency::from(g);
    std::vector<NodeId> labels(50);
    std::iota(labels.begin(), labels.end(), 0u);
    Rng rng(9);
    for (int r = 0; r < 10; ++r) propagate_round(adj, labels, rng);
    for (NodeId l : labels) EXPECT_LT(l, 50u);
}

TEST(ContractOnce, CliqueCollapsesToOne) {
    const WeightedGraph k4 = from_edges(4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {1, 2, 1}, {1, 3, 1}, {2, 3, 1}});
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const Contraction c = contract_once(k4, 10, rng);
        EXPECT_EQ(c.coarse.node_count(), 1u);
        EXPECT_EQ(c.coarse.edge_count(), 0u);
    }
}

TEST(ContractOnce, IsolatedNodesStaySeparate) {
    Rng rng(1);
    const Contraction c = contract_once(WeightedGraph(2), 10, rng);
    EXPECT_EQ(c.coarse.node_count(), 2u);
    EXPECT_EQ(c.node_map, (std::vector<NodeId>{0, 1}));
}

TEST(ContractOnce, PathShrinks) {
    const WeightedGraph path = from_edges(5, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 4, 1}});
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        EXPECT_LT(contract_once(path, 10, rng).coarse.node_count(), 5u) << "seed " << seed;
    }
}

TEST(ContractOnce, MapIsTotalSurjectiveAndConservesWeight) {
    std::mt19937_64 gen(12);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 5 + gen() % 60;
        WeightedGraph g(n);
        for (std::size_t i = 0; i < n * 3; ++i) g.add_weight(gen() % n, gen() % n, static_cast<double>(1 + gen() % 4));
        Rng rng(trial);
        const Contraction c = contract_once(g, 10, rng);
        ASSERT_EQ(c.node_map.size(), n);
        std::vector<int> hit(c.coarse.node_count(), 0);
        NodeId next_new = 0;
        for (NodeId m : c.node_map) {
            ASSERT_LT(m, c.coarse.node_count());
            if (!hit[m]++) {
                ASSERT_EQ(m, next_new++);  // numbered by first member
            }
        }
        for (int h : hit) ASSERT_GT(h, 0);
        // Integer weights, so the sums are exact.
        ASSERT_EQ(c.coarse.total_weight(), g.total_weight() - intra_weight(g, c.node_map));
        std::map<std::pair<NodeId, NodeId>, double> expected;
        for (const Edge& e : g.edges()) {
            NodeId a = c.node_map[e.u], b = c.node_map[e.v];
            if (a == b) continue;
            expected[{std::min(a, b), std::max(a, b)}] += e.weight;
        }
        ASSERT_EQ(c.coarse.edge_count(), expected.size());
        for (auto [p, w] : expected) ASSERT_EQ(c.coarse.weight(p.first, p.second), w);
    }
}

TEST(Hierarchy, SmallGraphNeedsNoContraction) {
    WeightedGraph g(10);
    g.add_weight(0, 1, 1);
    EXPECT_EQ(build_hierarchy(g, {}).level_count(), 1u);
    EXPECT_EQ(build_hierarchy(WeightedGraph(10), ContractionConfig{.target_size = 2, .propagation = {}}).level_count(), 1u);
}

TEST(Hierarchy, TwoTrianglesToTargetTwo) {
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        ContractionConfig cfg;
        cfg.target_size = 2;
        cfg.seed = seed;
        const auto h = build_hierarchy(two_triangles(), cfg);
        const auto& top = h.top().graph;
        ok += top.node_count() == 2 && top.edge_count() == 1 && top.weight(0, 1) == 1.0;
    }
    EXPECT_GE(ok, 95);
}

TEST(Hierarchy, LevelsShrinkAndComposeMaps) {
    std::mt19937_64 gen(2);
    WeightedGraph g(400);
    for (int i = 0; i < 1200; ++i) g.add_weight(gen() % 400, gen() % 400, 1.0);
    ContractionConfig cfg;
    cfg.target_size = 10;
    const auto h = build_hierarchy(g, cfg);
    ASSERT_GT(h.level_count(), 1u);
    for (std::size_t l = 1; l < h.level_count(); ++l) {
        EXPECT_LT(h.level(l).graph.node_count(), h.level(l - 1).graph.node_count());
        const auto members = h.level(l).members;
        EXPECT_EQ(std::accumulate(members.begin(), members.end(), 0u), 400u);
    }
    const auto top = h.map_to_top();
    for (NodeId v = 0; v < 400; ++v) {
        NodeId x = v;
        for (std::size_t l = 0; l + 1 < h.level_count(); ++l) x = h.level(l).to_coarser[x];
        ASSERT_EQ(top[v], x);
    }
}

TEST(Hierarchy, Deterministic) {
    std::mt19937_64 gen(6);
    WeightedGraph g(300);
    for (int i = 0; i < 900; ++i) g.add_weight(gen() % 300, gen() % 300, 0.5);
    ContractionConfig cfg;
    cfg.target_size = 20;
    cfg.seed = 44;
    const auto a = build_hierarchy(g, cfg);
    const auto b = build_hierarchy(g, cfg);
    ASSERT_EQ(a.level_count(), b.level_count());
    for (std::size_t l = 0; l < a.level_count(); ++l) {
        EXPECT_EQ(a.level(l).to_coarser, b.level(l).to_coarser);
        EXPECT_EQ(a.level(l).graph.edges(), b.level(l).graph.edges());
    }
}

TEST(Hierarchy, LevelMapOutput) {
    ContractionConfig cfg;
    cfg.target_size = 2;
    const auto h = build_hierarchy(two_triangles(), cfg);
    std::ostringstream out;
    write_level_map(out, h, 0);
    std::istringstream in(out.str());
    int lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    EXPECT_EQ(lines, 6);
}

TEST(Hierarchy, TwoCliquesWithBridge) {
    for (std::size_t a : {3u, 7u, 20u}) {
        const auto h = build_hierarchy(two_cliques(a, 5, 0.25), ContractionConfig{.target_size = 2, .seed = a, .propagation = {}});
        EXPECT_EQ(h.top().graph.node_count(), 2u);
        EXPECT_EQ(h.top().graph.weight(0, 1), 0.25);
    }
}
