#include "lagcn/propagation.hpp"

#include <cmath>
#include <string>

#include "lagcn/error.hpp"

namespace lagcn {

namespace {

constexpr const char* kModule = "propagation";

void check_shape(const Graph& g, const Matrix& x) {
    if (x.rows() != g.num_nodes()) {
        fail(kModule, "feature rows (" + std::to_string(x.rows()) + ") differ from node count (" +
                          std::to_string(g.num_nodes()) + ")");
    }
}

double edge_weight(const Graph& g, NodeId v, NodeId u, Normalization norm) {
    switch (norm) {
    case Normalization::row_mean: return 1.0 / static_cast<double>(g.degree(v));
    case Normalization::symmetric:
        return 1.0 / std::sqrt(static_cast<double>(g.degree(v)) * static_cast<double>(g.degree(u)));
    case Normalization::binary: return 1.0;
    }
    return 0.0;
}

} // namespace

const char* to_string(Normalization n) noexcept {
    switch (n) {
    case Normalization::row_mean: return "row-mean";
    case Normalization::symmetric: return "symmetric";
    case Normalization::binary: return "binary";
    }
    return "?";
}

Normalization parse_normalization(std::string_view text) {
    if (text == "row-mean" || text == "row_mean" || text == "mean") return Normalization::row_mean;
    if (text == "symmetric") return Normalization::symmetric;
    if (text == "binary") return Normalization::binary;
    fail(kModule, "unknown normalization '" + std::string(text) + "'");
}

Matrix aggregate(const Graph& g, const Matrix& x, Normalization norm) {
    check_shape(g, x);
    Matrix out(x.rows(), x.cols());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        auto orow = out.row(v);
        for (NodeId u : g.neighbors(v)) {
            const double w = edge_weight(g, v, u, norm);
            auto xrow = x.row(u);
            for (std::size_t j = 0; j < x.cols(); ++j) orow[j] += w * xrow[j];
        }
    }
    return out;
}

Matrix aggregate_transpose(const Graph& g, const Matrix& x, Normalization norm) {
    check_shape(g, x);
    Matrix out(x.rows(), x.cols());
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        auto xrow = x.row(v);
        for (NodeId u : g.neighbors(v)) {
            const double w = edge_weight(g, v, u, norm);
            auto orow = out.row(u);
            for (std::size_t j = 0; j < x.cols(); ++j) orow[j] += w * xrow[j];
        }
    }
    return out;
}

Matrix propagate(const Graph& g, const Matrix& x, const PropagationConfig& cfg) {
    if (cfg.k < 0 || cfg.k > cfg.max_k) {
        fail(kModule, "hop count " + std::to_string(cfg.k) + " outside [0, " + std::to_string(cfg.max_k) + "]");
    }
    check_shape(g, x);
    if (!g.has_self_loops()) fail(kModule, "propagation requires self-loops on every node");
    Matrix h = x;
    for (int step = 0; step < cfg.k; ++step) h = aggregate(g, h, cfg.norm);
    return h;
}

Matrix edge_input_features(const Graph& g, const NodeTable& t, const EdgeFeatureConfig& cfg) {
    if (cfg.raw) return t.features;
    return propagate(g, t.features, PropagationConfig{cfg.k, cfg.norm});
}

} // namespace lagcn
