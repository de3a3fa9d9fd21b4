#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lagcn/matrix.hpp"

namespace lagcn {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

inline constexpr int kUnknownLabel = -1;

/// Directed graph in sorted compressed-sparse-row form.
///
/// Invariants (checked on construction):
///  - row_offsets has num_nodes+1 entries, is nondecreasing, and ends at num_edges
///  - every target is < num_nodes and targets within a row strictly increase
/// has_self_loops() reports whether every node carries its (v, v) edge.
class Graph {
public:
    Graph() = default;
    Graph(std::size_t num_nodes, std::vector<std::size_t> row_offsets, std::vector<NodeId> col_targets);

    /// Builds a graph from an arbitrary edge list. Duplicates are dropped and
    /// counted in `duplicates` when given. With `mirror`, (v, u) is added for
    /// every (u, v) and a repeated unordered pair counts as a duplicate.
    static Graph from_edges(std::size_t num_nodes, std::span<const Edge> edges, bool add_self_loops,
                            bool mirror, std::size_t* duplicates = nullptr);

    /// Builds a graph from per-node adjacency lists (need not be sorted or unique).
    static Graph from_adjacency(std::vector<std::vector<NodeId>> adjacency);

    std::size_t num_nodes() const noexcept { return num_nodes_; }
    std::size_t num_edges() const noexcept { return col_targets_.size(); }
    bool has_self_loops() const noexcept { return has_self_loops_; }

    std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
    std::span<const NodeId> col_targets() const noexcept { return col_targets_; }

    std::span<const NodeId> neighbors(NodeId v) const noexcept {
        return {col_targets_.data() + row_offsets_[v], row_offsets_[v + 1] - row_offsets_[v]};
    }

    std::size_t degree(NodeId v) const noexcept { return row_offsets_[v + 1] - row_offsets_[v]; }
    /// Out-degree excluding the self-loop.
    std::size_t degree_without_self(NodeId v) const noexcept;

    bool has_edge(NodeId u, NodeId v) const noexcept;
    bool is_symmetric() const noexcept;

    std::vector<Edge> edges() const;
    std::vector<std::vector<NodeId>> adjacency() const;

    bool operator==(const Graph& other) const = default;

private:
    std::size_t num_nodes_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<NodeId> col_targets_;
    bool has_self_loops_ = false;
};

enum class Split : std::uint8_t { train, val, test };

const char* to_string(Split s) noexcept;
std::optional<Split> parse_split(std::string_view text) noexcept;

/// Set of split tags used to restrict metrics to a subset of nodes.
struct SplitSet {
    bool train = true;
    bool val = true;
    bool test = true;

    static SplitSet all() { return {}; }
    static SplitSet only(Split s) { return {s == Split::train, s == Split::val, s == Split::test}; }

    bool contains(Split s) const noexcept {
        switch (s) {
        case Split::train: return train;
        case Split::val: return val;
        case Split::test: return test;
        }
        return false;
    }
};

/// Per-node data: features, labels (kUnknownLabel for unknown), class count
/// and split tags.
struct NodeTable {
    Matrix features;
    std::vector<int> labels;
    int num_classes = 0;
    std::vector<Split> splits;

    std::size_t num_nodes() const noexcept { return labels.size(); }
    bool has_label(NodeId v) const noexcept { return labels[v] != kUnknownLabel; }
    std::vector<NodeId> nodes_in(Split s) const;

    /// Throws on any invariant violation (label range, train labels known,
    /// row counts). When `graph` is given, also checks the row count against it.
    void validate(const Graph* graph = nullptr) const;
};

struct Dataset {
    Graph graph;
    NodeTable table;
};

struct PositiveRatioReport {
    /// r_v, or nullopt when node v has no counted non-self neighbor.
    std::vector<std::optional<double>> per_node;
    std::vector<std::size_t> positive_counts;
    std::vector<std::size_t> neighbor_counts;
    std::size_t positive_edges = 0;
    std::size_t counted_edges = 0;
    /// R = Σ n_v⁺ / Σ n_v, or nullopt when no edge was counted.
    std::optional<double> graph_ratio;
};

/// Fraction of same-label neighbors. Self-loops are excluded and an edge
/// counts only when both endpoints have known labels and lie in `use_splits`.
PositiveRatioReport positive_ratio(const Graph& g, const NodeTable& t, SplitSet use_splits = SplitSet::all());

/// Nodes at shortest-path distance exactly 2 from v, ascending.
std::vector<NodeId> two_hop_candidates(const Graph& g, NodeId v);

/// Connects each node to k distinct different-label nodes that are not its
/// neighbors in g (both directions). Picks by different nodes may coincide,
/// so the edge count grows by at most 2kN. Sampling is uniform and seeded.
Graph degrade(const Graph& g, const NodeTable& t, std::size_t k, std::uint64_t seed);

struct SynthParams {
    std::size_t num_nodes = 1000;
    int num_classes = 4;
    std::size_t feature_dim = 16;
    double homophily = 0.5;
    double avg_degree = 8.0;
    double feature_sep = 1.0;
    std::uint64_t seed = 0;
};

/// Planted-partition generator: balanced labels, each undirected edge is
/// intra-class with probability `homophily`, features are unit-variance
/// Gaussians around class means whose pairwise distance is `feature_sep`.
/// Splits are 10/10/80 train/val/test within each class.
Dataset synth(const SynthParams& params);

} // namespace lagcn
