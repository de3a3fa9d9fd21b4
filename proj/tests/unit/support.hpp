#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "lagcn/graph.hpp"
#include "lagcn/random.hpp"

namespace lagcn::testing {

/// Undirected graph with self-loops from an edge list.
inline Graph undirected(std::size_t n, std::vector<Edge> edges) {
    return Graph::from_edges(n, edges, true, true);
}

/// Table with the given labels, all train, and features row v = feats[v].
inline NodeTable table(std::vector<int> labels, std::vector<std::vector<double>> feats = {}) {
    NodeTable t;
    const std::size_t n = labels.size();
    const std::size_t d = feats.empty() ? 1 : feats.front().size();
    t.features = Matrix(n, d, 1.0);
    for (std::size_t v = 0; v < feats.size(); ++v)
        for (std::size_t j = 0; j < d; ++j) t.features(v, j) = feats[v][j];
    t.num_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    t.labels = std::move(labels);
    t.splits.assign(n, Split::train);
    return t;
}

/// Relative error used by the gradient checks; denominators are floored so
/// coordinates with vanishing gradient compare absolutely.
inline double relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({1e-6, std::abs(analytic), std::abs(numeric)});
}

/// Central differences at `count` random coordinates of `params`. Returns
/// the largest relative error against `analytic`.
inline double max_fd_error(std::vector<std::span<double>> params, const std::vector<std::span<double>>& analytic,
                           const std::function<double()>& loss, std::size_t count, std::uint64_t seed,
                           double step = 1e-5) {
    std::size_t total = 0;
    for (auto& p : params) total += p.size();
    SplitMix64 rng(seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t flat = rng() % total;
        std::size_t t = 0;
        while (flat >= params[t].size()) flat -= params[t++].size();
        double& x = params[t][flat];
        const double saved = x;
        x = saved + step;
        const double up = loss();
        x = saved - step;
        const double down = loss();
        x = saved;
        worst = std::max(worst, relative_error(analytic[t][flat], (up - down) / (2 * step)));
    }
    return worst;
}

} // namespace lagcn::testing
