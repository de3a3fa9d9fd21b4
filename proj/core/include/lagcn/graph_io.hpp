#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "lagcn/graph.hpp"

namespace lagcn {

struct LoadOptions {
    bool normalize_features = true; ///< Rescale each feature row to unit L1 norm.
    bool undirected = true;         ///< Mirror every input edge.
    int num_classes = 0;            ///< 0 infers C as max label + 1.
};

struct LoadStats {
    std::size_t duplicate_edges = 0;
};

/// Reads nodes.tsv (`id<TAB>label<TAB>split<TAB>f1,f2,...`) and edges.tsv
/// (`u<TAB>v`, `#` comments). Self-loops are added to every node exactly once.
Dataset load(const std::filesystem::path& node_file, const std::filesystem::path& edge_file,
             const LoadOptions& options = {}, LoadStats* stats = nullptr);

Dataset read_dataset(std::istream& nodes, std::istream& edges, const LoadOptions& options = {},
                     LoadStats* stats = nullptr);

/// Writes nodes.tsv with shortest round-trip decimal features.
void write_nodes(std::ostream& out, const NodeTable& t);
/// Writes non-self edges; a symmetric graph is written as u < v pairs only.
void write_edges(std::ostream& out, const Graph& g);

void save(const std::filesystem::path& node_file, const std::filesystem::path& edge_file, const Dataset& d);
void save_edges(const std::filesystem::path& edge_file, const Graph& g);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

} // namespace lagcn
