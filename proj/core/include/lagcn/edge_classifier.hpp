#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lagcn/graph.hpp"
#include "lagcn/matrix.hpp"

namespace lagcn {

enum class ClassWeighting { none, balanced };

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 100;
    std::size_t batch_size = 64;
    std::size_t proj_dim = 64;
    std::vector<std::size_t> hidden_widths{32};
    std::uint64_t seed = 0;
    ClassWeighting class_weighting = ClassWeighting::balanced;
    bool include_two_hop = true;
    double momentum = 0.9;
    /// L2 penalty applied in the update step (not part of edge_loss).
    double weight_decay = 0.0;
    double threshold = 0.5;
    /// Extra uniformly sampled train-train pairs (provenance `sampled`).
    std::size_t sampled_pairs = 0;

    void validate() const;
};

enum class PairProvenance : std::uint8_t { one_hop, two_hop, sampled };

struct LabeledPair {
    NodeId u = 0;
    NodeId v = 0;
    int label = 0; ///< 1 iff y_u == y_v
    PairProvenance provenance = PairProvenance::one_hop;

    bool operator==(const LabeledPair&) const = default;
};

struct PairSet {
    std::vector<LabeledPair> pairs;

    std::size_t size() const noexcept { return pairs.size(); }
    std::size_t positives() const noexcept;
    std::size_t negatives() const noexcept { return size() - positives(); }
};

/// Training pairs: every non-self 1-hop train-train edge, plus (when
/// include_two_hop) every train-train pair at distance 2, plus
/// cfg.sampled_pairs random train-train pairs. Order is deterministic.
PairSet build_pairs(const Graph& g, const NodeTable& t, const TrainConfig& cfg);

/// Every unordered non-self 1-hop pair with both labels known and at least
/// one endpoint outside the train split.
PairSet held_out_pairs(const Graph& g, const NodeTable& t);

/// |a - b| ⊕ (a + b) ⊕ (a ∘ b).
std::vector<double> pair_features(std::span<const double> a, std::span<const double> b);

struct DenseLayer {
    Matrix weights; ///< in × out
    std::vector<double> bias;

    bool operator==(const DenseLayer&) const = default;
};

/// Projection W_e followed by an MLP over symmetric pair features. Hidden
/// layers use ReLU; the final layer has one unit and a sigmoid output.
struct EdgeClassifier {
    Matrix projection; ///< d × d'
    std::vector<DenseLayer> layers;

    /// Uniform(-1/√fan_in, 1/√fan_in) initialization.
    static EdgeClassifier initialize(std::size_t input_dim, const TrainConfig& cfg);

    std::size_t input_dim() const noexcept { return projection.rows(); }
    std::size_t proj_dim() const noexcept { return projection.cols(); }

    void validate() const;

    /// Flat views over every parameter tensor, in checkpoint order.
    std::vector<std::span<double>> parameters();
    std::vector<std::span<const double>> parameters() const;

    /// Projects every feature row: features · W_e.
    Matrix project(const Matrix& features) const;

    double logit_projected(std::span<const double> eu, std::span<const double> ev) const;
    double score_projected(std::span<const double> eu, std::span<const double> ev) const;

    bool operator==(const EdgeClassifier&) const = default;
};

/// Probability that (u, v) is a same-label pair, from raw feature rows.
double score(const EdgeClassifier& c, std::span<const double> x_u, std::span<const double> x_v);

struct ClassWeights {
    double negative = 1.0;
    double positive = 1.0;
};

ClassWeights class_weights(const PairSet& pairs, ClassWeighting mode);

/// Weighted mean binary cross-entropy over pairs[indices]. When `grad` is
/// non-null it receives the gradient (same shape as `c`).
double edge_loss(const EdgeClassifier& c, const PairSet& pairs, const Matrix& features,
                 std::span<const std::size_t> indices, const ClassWeights& weights, EdgeClassifier* grad);

struct TrainingLog {
    std::vector<double> epoch_loss; ///< Full-data loss; entry 0 is at initialization.
    double final_loss() const { return epoch_loss.empty() ? 0.0 : epoch_loss.back(); }
};

/// Mini-batch gradient descent (optional momentum) on the weighted binary
/// cross-entropy. Deterministic given cfg.seed.
EdgeClassifier train_edge_classifier(const PairSet& pairs, const Matrix& features, const TrainConfig& cfg,
                                     TrainingLog* log = nullptr);

struct ClassifierQuality {
    std::size_t true_pos = 0;  ///< y = 1, ŷ = 1
    std::size_t false_neg = 0; ///< y = 1, ŷ = 0
    std::size_t false_pos = 0; ///< y = 0, ŷ = 1
    std::size_t true_neg = 0;  ///< y = 0, ŷ = 0

    std::optional<double> p;     ///< P(ŷ=1 | y=1)
    std::optional<double> q;     ///< P(ŷ=1 | y=0)
    std::optional<double> p_pre; ///< P(y=1 | ŷ=1)

    std::size_t total() const noexcept { return true_pos + false_neg + false_pos + true_neg; }
};

/// Fills p, q and p_pre from confusion counts; undefined cells stay nullopt.
ClassifierQuality quality_from_counts(std::size_t tp, std::size_t fn, std::size_t fp, std::size_t tn);

ClassifierQuality evaluate_quality(const EdgeClassifier& c, const PairSet& pairs, const Matrix& features,
                                   double threshold = 0.5);

} // namespace lagcn
