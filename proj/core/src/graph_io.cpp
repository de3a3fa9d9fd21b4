#include "lagcn/graph_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "lagcn/error.hpp"

namespace lagcn {

namespace {

constexpr const char* kModule = "graph-core";

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    return s;
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

[[noreturn]] void malformed(std::string_view file, std::size_t line, const std::string& what) {
    fail(kModule, std::string(file) + " line " + std::to_string(line) + ": " + what);
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    text = trim(text);
    if (text.empty()) return false;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

struct NodeRow {
    long long id;
    int label;
    Split split;
    std::vector<double> features;
};

} // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) fail(kModule, "failed to format a double");
    return std::string(buf, ptr);
}

Dataset read_dataset(std::istream& nodes, std::istream& edges, const LoadOptions& options, LoadStats* stats) {
    std::vector<NodeRow> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t dim = 0;
    bool dim_known = false;
    while (std::getline(nodes, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto fields = split_on(text, '\t');
        if (fields.size() != 4) malformed("nodes", line_no, "expected 4 tab-separated fields");
        NodeRow row{};
        if (!parse_number(fields[0], row.id) || row.id < 0) malformed("nodes", line_no, "bad node id");
        if (!parse_number(fields[1], row.label) || row.label < kUnknownLabel) malformed("nodes", line_no, "bad label");
        const auto split = parse_split(trim(fields[2]));
        if (!split) malformed("nodes", line_no, "split must be train, val or test");
        row.split = *split;
        const auto feat_text = trim(fields[3]);
        if (!feat_text.empty()) {
            for (auto f : split_on(feat_text, ',')) {
                double x = 0.0;
                if (!parse_number(f, x)) malformed("nodes", line_no, "bad feature value");
                row.features.push_back(x);
            }
        }
        if (!dim_known) {
            dim = row.features.size();
            dim_known = true;
        } else if (row.features.size() != dim) {
            malformed("nodes", line_no, "feature width " + std::to_string(row.features.size()) + " differs from " +
                                            std::to_string(dim));
        }
        rows.push_back(std::move(row));
    }

    const std::size_t n = rows.size();
    Dataset d;
    NodeTable& t = d.table;
    t.features = Matrix(n, dim);
    t.labels.assign(n, kUnknownLabel);
    t.splits.assign(n, Split::test);
    std::vector<bool> seen(n, false);
    int max_label = -1;
    for (const auto& row : rows) {
        if (static_cast<std::size_t>(row.id) >= n) {
            fail(kModule, "node id " + std::to_string(row.id) + " out of range; ids must be 0-based and contiguous");
        }
        const auto v = static_cast<std::size_t>(row.id);
        if (seen[v]) fail(kModule, "node id " + std::to_string(v) + " appears twice");
        seen[v] = true;
        t.labels[v] = row.label;
        t.splits[v] = row.split;
        max_label = std::max(max_label, row.label);
        auto out = t.features.row(v);
        double l1 = 0.0;
        for (double x : row.features) l1 += std::abs(x);
        for (std::size_t j = 0; j < dim; ++j) {
            out[j] = (options.normalize_features && l1 > 0.0) ? row.features[j] / l1 : row.features[j];
        }
    }
    t.num_classes = options.num_classes > 0 ? options.num_classes : max_label + 1;
    for (std::size_t v = 0; v < n; ++v) {
        if (t.labels[v] >= t.num_classes) {
            fail(kModule, "node " + std::to_string(v) + " label " + std::to_string(t.labels[v]) +
                              " >= class count " + std::to_string(t.num_classes));
        }
    }

    std::vector<Edge> edge_list;
    line_no = 0;
    while (std::getline(edges, line)) {
        ++line_no;
        const auto text = trim(line);
        if (text.empty() || text.front() == '#') continue;
        auto fields = split_on(text, '\t');
        if (fields.size() == 1) fields = split_on(text, ' ');
        if (fields.size() != 2) malformed("edges", line_no, "expected `u<TAB>v`");
        long long u = 0;
        long long v = 0;
        if (!parse_number(fields[0], u) || !parse_number(fields[1], v) || u < 0 || v < 0) {
            malformed("edges", line_no, "bad node id");
        }
        if (static_cast<std::size_t>(u) >= n || static_cast<std::size_t>(v) >= n) {
            malformed("edges", line_no, "node id out of range (" + std::to_string(n) + " nodes)");
        }
        edge_list.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
    std::size_t dups = 0;
    d.graph = Graph::from_edges(n, edge_list, true, options.undirected, &dups);
    if (stats) stats->duplicate_edges = dups;
    t.validate(&d.graph);
    return d;
}

Dataset load(const std::filesystem::path& node_file, const std::filesystem::path& edge_file,
             const LoadOptions& options, LoadStats* stats) {
    std::ifstream nodes(node_file);
    if (!nodes) fail(kModule, "cannot open " + node_file.string());
    std::ifstream edges(edge_file);
    if (!edges) fail(kModule, "cannot open " + edge_file.string());
    return read_dataset(nodes, edges, options, stats);
}

void write_nodes(std::ostream& out, const NodeTable& t) {
    for (std::size_t v = 0; v < t.num_nodes(); ++v) {
        out << v << '\t' << t.labels[v] << '\t' << to_string(t.splits[v]) << '\t';
        auto row = t.features.row(v);
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out << ',';
            out << format_double(row[j]);
        }
        out << '\n';
    }
}

void write_edges(std::ostream& out, const Graph& g) {
    const bool symmetric = g.is_symmetric();
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        for (NodeId v : g.neighbors(u)) {
            if (u == v || (symmetric && v < u)) continue;
            out << u << '\t' << v << '\n';
        }
    }
}

void save(const std::filesystem::path& node_file, const std::filesystem::path& edge_file, const Dataset& d) {
    std::ofstream nodes(node_file);
    if (!nodes) fail(kModule, "cannot write " + node_file.string());
    write_nodes(nodes, d.table);
    save_edges(edge_file, d.graph);
}

void save_edges(const std::filesystem::path& edge_file, const Graph& g) {
    std::ofstream edges(edge_file);
    if (!edges) fail(kModule, "cannot write " + edge_file.string());
    write_edges(edges, g);
}

} // namespace lagcn
