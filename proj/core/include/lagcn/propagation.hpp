#pragma once

#include "lagcn/graph.hpp"
#include "lagcn/matrix.hpp"

namespace lagcn {

/// Aggregation operator Ŝ used by propagation.
///  - row_mean:  Ŝ = D⁻¹A, each node averages its neighbors (self included)
///  - symmetric: Ŝ = D^{-1/2} A D^{-1/2}
///  - binary:    Ŝ = A (unnormalized sums)
enum class Normalization { row_mean, symmetric, binary };

const char* to_string(Normalization n) noexcept;
Normalization parse_normalization(std::string_view text);

struct PropagationConfig {
    int k = 2;
    Normalization norm = Normalization::row_mean;
    int max_k = 8;
};

/// One application of Ŝ.
Matrix aggregate(const Graph& g, const Matrix& x, Normalization norm);
/// One application of Ŝᵀ; the adjoint used when backpropagating through aggregate().
Matrix aggregate_transpose(const Graph& g, const Matrix& x, Normalization norm);

/// Ŝᵏx. k = 0 returns x unchanged. Requires self-loops on g.
Matrix propagate(const Graph& g, const Matrix& x, const PropagationConfig& cfg);

struct EdgeFeatureConfig {
    bool raw = false; ///< Use X directly instead of Ŝ²X.
    int k = 2;
    Normalization norm = Normalization::row_mean;
};

/// Inputs for the edge classifier: Ŝᵏ X (default k = 2, row-mean) or raw X.
Matrix edge_input_features(const Graph& g, const NodeTable& t, const EdgeFeatureConfig& cfg = {});

} // namespace lagcn
