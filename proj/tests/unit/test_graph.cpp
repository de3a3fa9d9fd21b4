#include <gtest/gtest.h>

#include <map>
#include <queue>
#include <set>

#include "lagcn/error.hpp"
#include "lagcn/graph.hpp"
#include "support.hpp"

namespace lagcn {
namespace {

using testing::table;
using testing::undirected;

TEST(Graph, HandEnumeratedCsr) {
    // 0-1, 0-2, 1-3, 3-4; rows below were written out by hand.
    const Graph g = undirected(5, {{0, 1}, {2, 0}, {1, 3}, {4, 3}});
    const std::vector<std::size_t> offsets{0, 3, 6, 8, 11, 13};
    const std::vector<NodeId> targets{0, 1, 2, 0, 1, 3, 0, 2, 1, 3, 4, 3, 4};
    EXPECT_EQ(std::vector<std::size_t>(g.row_offsets().begin(), g.row_offsets().end()), offsets);
    EXPECT_EQ(std::vector<NodeId>(g.col_targets().begin(), g.col_targets().end()), targets);
    EXPECT_TRUE(g.has_self_loops());
    EXPECT_TRUE(g.is_symmetric());
    EXPECT_EQ(g.degree_without_self(3), 2u);
}

TEST(Graph, DuplicatesCountedOnceUnordered) {
    std::size_t dups = 0;
    const std::vector<Edge> edges{{0, 1}, {1, 0}, {0, 1}, {1, 2}};
    const Graph g = Graph::from_edges(3, edges, true, true, &dups);
    EXPECT_EQ(dups, 2u);
    EXPECT_EQ(g.num_edges(), 3u + 4u);
}

TEST(Graph, ConstructorRejectsBrokenCsr) {
    EXPECT_THROW(Graph(2, {0, 2, 1}, {0, 1}), Error);
    EXPECT_THROW(Graph(2, {0, 1, 2}, {0, 5}), Error);
    EXPECT_THROW(Graph(1, {0, 2}, {0, 0}), Error);
    const std::vector<Edge> bad{{0, 3}};
    EXPECT_THROW(Graph::from_edges(2, bad, true, true), Error);
}

TEST(PositiveRatio, AllSameLabelIsOne) {
    const Graph g = undirected(4, {{0, 1}, {1, 2}, {2, 3}});
    const auto r = positive_ratio(g, table({1, 1, 1, 1}));
    ASSERT_TRUE(r.graph_ratio);
    EXPECT_DOUBLE_EQ(*r.graph_ratio, 1.0);
}

TEST(PositiveRatio, EnumeratedEdgesOracle) {
    const std::vector<Edge> edges{{0, 1}, {0, 2}, {2, 3}};
    const std::vector<int> labels{0, 0, 1, 1};
    // Oracle: each undirected edge contributes two directed entries.
    std::size_t pos = 0, total = 0;
    for (auto [u, v] : edges) {
        total += 2;
        if (labels[u] == labels[v]) pos += 2;
    }
    const auto r = positive_ratio(undirected(4, edges), table(labels));
    ASSERT_TRUE(r.graph_ratio);
    EXPECT_DOUBLE_EQ(*r.graph_ratio, static_cast<double>(pos) / static_cast<double>(total));
    EXPECT_DOUBLE_EQ(*r.graph_ratio, 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(*r.per_node[0], 0.5);
    EXPECT_DOUBLE_EQ(*r.per_node[3], 1.0);
}

TEST(PositiveRatio, NoCountedEdgesIsUndefined) {
    const Graph g = undirected(3, {});
    const auto r = positive_ratio(g, table({0, 1, 0}));
    EXPECT_FALSE(r.graph_ratio);
    EXPECT_FALSE(r.per_node[1]);
}

TEST(PositiveRatio, UnknownLabelsAndSplitsExcluded) {
    NodeTable t = table({0, 0, 1});
    t.labels[2] = kUnknownLabel;
    t.splits[2] = Split::test;
    const Graph g = undirected(3, {{0, 1}, {1, 2}});
    EXPECT_EQ(positive_ratio(g, t).counted_edges, 2u);
    t.labels[2] = 1;
    t.splits[1] = Split::val;
    EXPECT_EQ(positive_ratio(g, t, SplitSet::only(Split::train)).counted_edges, 0u);
}

TEST(TwoHop, PathAndComplete) {
    const Graph path = undirected(3, {{0, 1}, {1, 2}});
    EXPECT_EQ(two_hop_candidates(path, 0), std::vector<NodeId>{2});
    const Graph k4 = undirected(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    for (NodeId v = 0; v < 4; ++v) EXPECT_TRUE(two_hop_candidates(k4, v).empty());
}

std::vector<NodeId> bfs_distance_two(const std::vector<Edge>& edges, std::size_t n, NodeId src) {
    std::vector<std::vector<NodeId>> adj(n);
    for (auto [u, v] : edges) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    std::vector<int> dist(n, -1);
    std::queue<NodeId> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
        const NodeId u = q.front();
        q.pop();
        for (NodeId w : adj[u]) {
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                q.push(w);
            }
        }
    }
    std::vector<NodeId> out;
    for (NodeId v = 0; v < n; ++v)
        if (dist[v] == 2) out.push_back(v);
    return out;
}

TEST(TwoHop, BranchingFixtureMatchesBfs) {
    const std::vector<Edge> edges{{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 4}, {4, 5}, {2, 3}};
    const Graph g = undirected(6, edges);
    for (NodeId v = 0; v < 6; ++v) EXPECT_EQ(two_hop_candidates(g, v), bfs_distance_two(edges, 6, v)) << "node " << v;
}

TEST(TwoHop, RandomGraphsMatchBfs) {
    SplitMix64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + rng() % 20;
        std::vector<Edge> edges;
        for (std::size_t i = 0; i < 2 * n; ++i) {
            const NodeId u = rng() % n, v = rng() % n;
            if (u != v) edges.emplace_back(u, v);
        }
        const Graph g = undirected(n, edges);
        for (NodeId v = 0; v < n; ++v) ASSERT_EQ(two_hop_candidates(g, v), bfs_distance_two(edges, n, v));
    }
}

Dataset small_synth(std::size_t n, double homophily, std::uint64_t seed) {
    SynthParams p;
    p.num_nodes = n;
    p.num_classes = 4;
    p.feature_dim = 4;
    p.homophily = homophily;
    p.avg_degree = 2;
    p.seed = seed;
    return synth(p);
}

TEST(Degrade, ReproducibleAndCrossLabel) {
    const Dataset d = small_synth(10, 0.8, 3);
    const Graph a = degrade(d.graph, d.table, 2, 11);
    const Graph b = degrade(d.graph, d.table, 2, 11);
    EXPECT_EQ(a.edges(), b.edges());
    EXPECT_LE(a.num_edges() - d.graph.num_edges(), 2u * 2u * 10u);
    for (NodeId v = 0; v < 10; ++v) {
        std::size_t fresh = 0;
        for (NodeId u : a.neighbors(v)) {
            if (d.graph.has_edge(v, u)) continue;
            EXPECT_NE(d.table.labels[u], d.table.labels[v]);
            ++fresh;
        }
        EXPECT_GE(fresh, 2u);
    }
    EXPECT_TRUE(a.is_symmetric());
    EXPECT_NE(degrade(d.graph, d.table, 2, 12).edges(), a.edges());
}

TEST(Degrade, Errors) {
    const Dataset d = small_synth(10, 0.8, 3);
    EXPECT_THROW(degrade(d.graph, d.table, 0, 1), Error);
    try {
        degrade(d.graph, d.table, 9, 1);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("node "), std::string::npos);
    }
}

TEST(Synth, HomophilyOneGivesPureRatio) {
    SynthParams p;
    p.homophily = 1.0;
    p.num_nodes = 400;
    const Dataset d = synth(p);
    EXPECT_DOUBLE_EQ(*positive_ratio(d.graph, d.table).graph_ratio, 1.0);
}

TEST(Synth, HalfHomophilyLargeN) {
    SynthParams p;
    p.homophily = 0.5;
    p.num_nodes = 5000;
    p.seed = 21;
    const double r = *positive_ratio(synth(p).graph, synth(p).table).graph_ratio;
    EXPECT_NEAR(r, 0.5, 0.03);
}

TEST(Synth, DeterministicAndWellFormed) {
    SynthParams p;
    p.num_nodes = 300;
    p.seed = 5;
    const Dataset a = synth(p);
    const Dataset b = synth(p);
    EXPECT_EQ(a.graph, b.graph);
    EXPECT_EQ(a.table.features, b.table.features);
    EXPECT_EQ(a.table.labels, b.table.labels);
    EXPECT_EQ(a.table.splits, b.table.splits);
    EXPECT_NO_THROW(a.table.validate(&a.graph));
    std::map<int, std::size_t> per_class;
    std::size_t train = 0;
    for (NodeId v = 0; v < 300; ++v) {
        ++per_class[a.table.labels[v]];
        train += a.table.splits[v] == Split::train;
    }
    EXPECT_EQ(per_class.size(), 4u);
    for (auto [c, count] : per_class) EXPECT_EQ(count, 75u);
    EXPECT_NEAR(static_cast<double>(train), 30.0, 4.0);
    const double mean_degree = static_cast<double>(a.graph.num_edges() - 300) / 300.0;
    EXPECT_NEAR(mean_degree, p.avg_degree, 0.05);
}

} // namespace
} // namespace lagcn
