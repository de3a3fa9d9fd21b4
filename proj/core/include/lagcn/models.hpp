#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lagcn/edge_classifier.hpp"
#include "lagcn/graph.hpp"
#include "lagcn/matrix.hpp"
#include "lagcn/propagation.hpp"

namespace lagcn {

struct FitConfig {
    double learning_rate = 0.2;
    int epochs = 200;
    double weight_decay = 5e-5;
    std::uint64_t seed = 0;
    std::size_t hidden_width = 32;
    double momentum = 0.0;
    Normalization norm = Normalization::row_mean;
    /// Early stopping on validation accuracy; 0 disables it.
    int patience = 0;

    void validate() const;
};

/// Propagate-then-linear classifier.
struct SgcModel {
    Matrix weights; ///< d × C
    std::vector<double> bias;
    int k = 2;
    Normalization norm = Normalization::row_mean;

    std::vector<std::span<double>> parameters();
    std::vector<std::span<const double>> parameters() const;
    bool operator==(const SgcModel&) const = default;
};

/// Two mean-aggregation layers: aggregate → linear → ReLU → aggregate → linear.
struct GcnModel {
    DenseLayer layer1; ///< d × h
    DenseLayer layer2; ///< h × C
    Normalization norm = Normalization::row_mean;

    std::vector<std::span<double>> parameters();
    std::vector<std::span<const double>> parameters() const;
    bool operator==(const GcnModel&) const = default;
};

/// Mean softmax cross-entropy over `nodes` plus (weight_decay/2)·‖W‖².
/// `propagated` is Ŝᵏ X. Writes the gradient into `grad` when non-null.
double sgc_loss(const SgcModel& m, const Matrix& propagated, const NodeTable& t, std::span<const NodeId> nodes,
                double weight_decay, SgcModel* grad);

/// GCN loss. `aggregated_x` is Ŝ X; `g == nullptr` makes the second
/// aggregation the identity, turning the model into a plain 2-layer MLP.
double gcn_loss(const GcnModel& m, const Graph* g, const Matrix& aggregated_x, const NodeTable& t,
                std::span<const NodeId> nodes, double weight_decay, GcnModel* grad);

SgcModel sgc_initialize(std::size_t input_dim, int num_classes, int k, const FitConfig& cfg);
GcnModel gcn_initialize(std::size_t input_dim, int num_classes, const FitConfig& cfg);

/// Full-batch gradient descent on train nodes. Deterministic given cfg.seed.
SgcModel sgc_fit(const Graph& g, const NodeTable& t, const FitConfig& cfg, int k);
GcnModel gcn_fit(const Graph& g, const NodeTable& t, const FitConfig& cfg);
/// gcn_fit with both aggregations replaced by the identity.
GcnModel mlp_fit(const NodeTable& t, const FitConfig& cfg);

Matrix sgc_logits(const SgcModel& m, const Graph& g, const NodeTable& t);
Matrix gcn_logits(const GcnModel& m, const Graph& g, const NodeTable& t);

/// Row-wise argmax; ties go to the lowest class id.
std::vector<int> argmax_rows(const Matrix& logits);

std::vector<int> predict(const SgcModel& m, const Graph& g, const NodeTable& t);
std::vector<int> predict(const GcnModel& m, const Graph& g, const NodeTable& t);

/// Fraction of nodes in `split` whose prediction equals the label.
double accuracy(std::span<const int> predictions, const NodeTable& t, Split split);

} // namespace lagcn
