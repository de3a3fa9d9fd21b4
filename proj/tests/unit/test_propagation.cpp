#include <gtest/gtest.h>

#include "lagcn/error.hpp"
#include "lagcn/propagation.hpp"
#include "support.hpp"

namespace lagcn {
namespace {

using testing::undirected;

/// Dense Ŝ for the given normalization, built from the adjacency directly.
Matrix dense_operator(const Graph& g, Normalization norm) {
    const std::size_t n = g.num_nodes();
    Matrix a(n, n);
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v : g.neighbors(u)) a(u, v) = 1.0;
    std::vector<double> deg(n, 0.0);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = 0; v < n; ++v) deg[u] += a(u, v);
    for (std::size_t u = 0; u < n; ++u) {
        for (std::size_t v = 0; v < n; ++v) {
            if (norm == Normalization::row_mean) a(u, v) /= deg[u];
            if (norm == Normalization::symmetric) a(u, v) /= std::sqrt(deg[u] * deg[v]);
        }
    }
    return a;
}

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
    SplitMix64 rng(seed);
    Matrix m(r, c);
    for (double& x : m.values()) x = rng.uniform() * 2 - 1;
    return m;
}

TEST(Propagate, ZeroStepsIsIdentity) {
    const Graph g = undirected(3, {{0, 1}, {1, 2}});
    const Matrix x = random_matrix(3, 2, 1);
    EXPECT_EQ(propagate(g, x, {0}), x);
}

TEST(Propagate, IsolatedNodeUnchanged) {
    const Graph g = undirected(4, {{0, 1}, {1, 2}});
    const Matrix x = random_matrix(4, 3, 2);
    for (int k = 1; k <= 4; ++k) {
        const Matrix y = propagate(g, x, {k});
        for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(y(3, j), x(3, j));
    }
}

TEST(Propagate, PathMatchesDenseMatrixPower) {
    const Graph g = undirected(3, {{0, 1}, {1, 2}});
    const Matrix x(3, 1, std::vector<double>{3.0, 0.0, 6.0});
    const Matrix s = dense_operator(g, Normalization::row_mean);
    const Matrix expected = matmul(s, matmul(s, x));
    const Matrix got = propagate(g, x, {2});
    EXPECT_LT(max_abs_diff(got, expected), 1e-12);
    // By hand: Ŝx = (1.5, 3, 3); Ŝ²x = (2.25, 2.5, 3).
    EXPECT_DOUBLE_EQ(got(0, 0), 2.25);
    EXPECT_DOUBLE_EQ(got(1, 0), 2.5);
    EXPECT_DOUBLE_EQ(got(2, 0), 3.0);
}

TEST(Propagate, AllNormalizationsMatchDenseOracle) {
    const Graph g = undirected(6, {{0, 1}, {0, 2}, {1, 3}, {2, 3}, {3, 4}, {0, 5}});
    const Matrix x = random_matrix(6, 4, 3);
    for (auto norm : {Normalization::row_mean, Normalization::symmetric, Normalization::binary}) {
        const Matrix s = dense_operator(g, norm);
        Matrix expected = x;
        for (int k = 1; k <= 3; ++k) {
            expected = matmul(s, expected);
            EXPECT_LT(max_abs_diff(propagate(g, x, {k, norm}), expected), 1e-12) << to_string(norm) << " k=" << k;
        }
        const Matrix st = transpose(s);
        EXPECT_LT(max_abs_diff(aggregate_transpose(g, x, norm), matmul(st, x)), 1e-12);
    }
}

TEST(Propagate, TransposeOnDirectedGraph) {
    const std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 0}, {0, 2}};
    const Graph g = Graph::from_edges(3, edges, true, false);
    const Matrix x = random_matrix(3, 2, 4);
    const Matrix s = dense_operator(g, Normalization::row_mean);
    EXPECT_LT(max_abs_diff(aggregate_transpose(g, x, Normalization::row_mean), matmul(transpose(s), x)), 1e-12);
}

TEST(Propagate, Errors) {
    const Graph g = undirected(3, {{0, 1}});
    EXPECT_THROW(propagate(g, Matrix(2, 1), {1}), Error);
    EXPECT_THROW(propagate(g, Matrix(3, 1), {9}), Error);
    EXPECT_THROW(propagate(g, Matrix(3, 1), {-1}), Error);
    const std::vector<Edge> edges{{0, 1}};
    const Graph bare = Graph::from_edges(2, edges, false, true);
    EXPECT_THROW(propagate(bare, Matrix(2, 1), {1}), Error);
    EXPECT_THROW(parse_normalization("median"), Error);
    EXPECT_EQ(parse_normalization("row-mean"), Normalization::row_mean);
}

TEST(EdgeFeatures, RawAndDefault) {
    const Graph g = undirected(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
    NodeTable t = testing::table({0, 1, 0, 1});
    t.features = random_matrix(4, 3, 5);
    EXPECT_EQ(edge_input_features(g, t, {true}), t.features);
    EXPECT_EQ(edge_input_features(g, t), propagate(g, t.features, {2}));
    // Dense two-step mean aggregation on the 4-cycle.
    const Matrix s = dense_operator(g, Normalization::row_mean);
    EXPECT_LT(max_abs_diff(edge_input_features(g, t), matmul(s, matmul(s, t.features))), 1e-12);
}

} // namespace
} // namespace lagcn
