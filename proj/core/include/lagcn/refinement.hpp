#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "lagcn/edge_classifier.hpp"
#include "lagcn/graph.hpp"
#include "lagcn/matrix.hpp"

namespace lagcn {

/// Scores unordered node pairs; higher means "more likely same-label".
/// Implementations must be symmetric in (u, v) and side-effect free.
class EdgeScorer {
public:
    virtual ~EdgeScorer() = default;

    virtual double score(NodeId u, NodeId v) const = 0;

    /// Scores node v's 2-hop candidate pool. The default scores each pair
    /// independently; scorers that rank relative to the pool override this.
    virtual std::vector<double> score_pool(NodeId v, std::span<const NodeId> pool) const;
};

/// Trained edge classifier over fixed node features (embeddings are projected once).
class ClassifierScorer final : public EdgeScorer {
public:
    ClassifierScorer(const EdgeClassifier& classifier, const Matrix& features);
    double score(NodeId u, NodeId v) const override;

private:
    const EdgeClassifier* classifier_;
    Matrix embeddings_;
};

/// Wraps an arbitrary symmetric scoring function (hand-set scores in tests).
class FunctionScorer final : public EdgeScorer {
public:
    explicit FunctionScorer(std::function<double(NodeId, NodeId)> fn) : fn_(std::move(fn)) {}
    double score(NodeId u, NodeId v) const override { return fn_(u, v); }

private:
    std::function<double(NodeId, NodeId)> fn_;
};

/// Ground-truth-driven classifier with controlled quality.
struct OracleClassifier {
    double target_p = 1.0;     ///< filter mode: P(predict + | same label)
    double target_q = 0.0;     ///< filter mode: P(predict + | different label)
    double target_p_pre = 1.0; ///< add mode: precision among added edges
    std::uint64_t seed = 0;

    void validate() const;
};

/// Filter mode: an independent per-unordered-pair coin decides the prediction
/// (score 1 or 0). Add mode: the candidate pool of v is ranked by interleaving
/// same-label and different-label candidates at rate target_p_pre, so any
/// prefix taken by the greedy adder has precision close to the target.
class OracleScorer final : public EdgeScorer {
public:
    OracleScorer(const NodeTable& t, const OracleClassifier& oc);
    double score(NodeId u, NodeId v) const override;
    std::vector<double> score_pool(NodeId v, std::span<const NodeId> pool) const override;

private:
    const NodeTable* table_;
    OracleClassifier oc_;
};

struct RefinementConfig {
    double threshold = 0.5;
    std::size_t n_max = 6;
    bool do_filter = true;
    bool do_add = true;

    void validate() const;
};

struct RefinementReport {
    std::size_t edges_before = 0; ///< directed CSR entries, self-loops included
    std::size_t edges_removed = 0;
    std::size_t edges_added = 0;
    std::size_t edges_after = 0;
    /// Active 2-hop promotions (unordered pairs) made by the adding step.
    std::size_t pairs_added = 0;
    /// Upper bound Σ_v max(0, n_max − degree_after_filter(v)) on pairs_added.
    std::size_t add_capacity = 0;
    std::optional<double> ratio_before;
    std::optional<double> ratio_after;
    /// non-self degree -> node count
    std::map<std::size_t, std::size_t> degree_histogram_before;
    std::map<std::size_t, std::size_t> degree_histogram_after;
};

std::map<std::size_t, std::size_t> degree_histogram(const Graph& g);

/// Removes every non-self pair whose score is below threshold (both
/// directions); each unordered pair is scored once. Self-loops stay.
Graph filter_edges(const Graph& g, const EdgeScorer& scorer, double threshold, RefinementReport* report = nullptr);

/// Greedy 2-hop promotion. Nodes are visited in ascending id; node v with
/// non-self degree below n_max takes its candidates (computed on g) scoring
/// at least threshold, best first with ties by ascending id, until its degree
/// reaches n_max. Edges are added in both directions.
Graph add_edges(const Graph& g, const EdgeScorer& scorer, std::size_t n_max, double threshold,
                RefinementReport* report = nullptr);

/// Filter then add, per cfg. When `t` is given, positive ratios are recorded.
Graph refine(const Graph& g, const NodeTable* t, const EdgeScorer& scorer, const RefinementConfig& cfg,
             RefinementReport* report = nullptr);

/// Convenience overload: scores with a trained classifier over `features`.
Graph refine(const Graph& g, const NodeTable& t, const EdgeClassifier& classifier, const Matrix& features,
             const RefinementConfig& cfg, RefinementReport* report = nullptr);

} // namespace lagcn
