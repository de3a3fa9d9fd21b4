#include "lagcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "lagcn/error.hpp"
#include "lagcn/random.hpp"

namespace lagcn {

namespace {
constexpr const char* kModule = "graph-core";
}

Graph::Graph(std::size_t num_nodes, std::vector<std::size_t> row_offsets, std::vector<NodeId> col_targets)
    : num_nodes_(num_nodes), row_offsets_(std::move(row_offsets)), col_targets_(std::move(col_targets)) {
    if (row_offsets_.size() != num_nodes_ + 1) fail(kModule, "row_offsets must have num_nodes+1 entries");
    if (row_offsets_.front() != 0) fail(kModule, "row_offsets must start at 0");
    if (row_offsets_.back() != col_targets_.size()) fail(kModule, "row_offsets must end at num_edges");
    has_self_loops_ = true;
    for (std::size_t v = 0; v < num_nodes_; ++v) {
        if (row_offsets_[v + 1] < row_offsets_[v]) fail(kModule, "row_offsets must be nondecreasing");
        bool self = false;
        for (std::size_t e = row_offsets_[v]; e < row_offsets_[v + 1]; ++e) {
            const NodeId u = col_targets_[e];
            if (u >= num_nodes_) {
                fail(kModule, "edge target " + std::to_string(u) + " out of range in row " + std::to_string(v));
            }
            if (e > row_offsets_[v] && col_targets_[e - 1] >= u) {
                fail(kModule, "row " + std::to_string(v) + " targets are not strictly increasing");
            }
            self = self || u == v;
        }
        has_self_loops_ = has_self_loops_ && self;
    }
}

Graph Graph::from_edges(std::size_t num_nodes, std::span<const Edge> edges, bool add_self_loops, bool mirror,
                        std::size_t* duplicates) {
    std::vector<Edge> directed;
    directed.reserve(edges.size() * (mirror ? 2 : 1) + (add_self_loops ? num_nodes : 0));
    std::vector<Edge> keys;
    keys.reserve(edges.size());
    for (auto [u, v] : edges) {
        if (u >= num_nodes || v >= num_nodes) {
            fail(kModule, "edge (" + std::to_string(u) + ", " + std::to_string(v) + ") references a node >= " +
                              std::to_string(num_nodes));
        }
        keys.push_back(mirror ? Edge{std::min(u, v), std::max(u, v)} : Edge{u, v});
        directed.emplace_back(u, v);
        if (mirror) directed.emplace_back(v, u);
    }
    if (duplicates) {
        std::sort(keys.begin(), keys.end());
        const auto unique_end = std::unique(keys.begin(), keys.end());
        *duplicates = static_cast<std::size_t>(keys.end() - unique_end);
    }
    if (add_self_loops) {
        for (std::size_t v = 0; v < num_nodes; ++v) directed.emplace_back(static_cast<NodeId>(v), static_cast<NodeId>(v));
    }
    std::sort(directed.begin(), directed.end());
    directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

    std::vector<std::size_t> offsets(num_nodes + 1, 0);
    std::vector<NodeId> targets;
    targets.reserve(directed.size());
    for (auto [u, v] : directed) {
        ++offsets[u + 1];
        targets.push_back(v);
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    return Graph(num_nodes, std::move(offsets), std::move(targets));
}

Graph Graph::from_adjacency(std::vector<std::vector<NodeId>> adjacency) {
    const std::size_t n = adjacency.size();
    std::vector<std::size_t> offsets(n + 1, 0);
    std::vector<NodeId> targets;
    for (std::size_t v = 0; v < n; ++v) {
        auto& row = adjacency[v];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        targets.insert(targets.end(), row.begin(), row.end());
        offsets[v + 1] = targets.size();
    }
    return Graph(n, std::move(offsets), std::move(targets));
}

std::size_t Graph::degree_without_self(NodeId v) const noexcept {
    return degree(v) - (has_edge(v, v) ? 1 : 0);
}

bool Graph::has_edge(NodeId u, NodeId v) const noexcept {
    if (u >= num_nodes_) return false;
    auto row = neighbors(u);
    return std::binary_search(row.begin(), row.end(), v);
}

bool Graph::is_symmetric() const noexcept {
    for (NodeId u = 0; u < num_nodes_; ++u)
        for (NodeId v : neighbors(u))
            if (!has_edge(v, u)) return false;
    return true;
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(num_edges());
    for (NodeId u = 0; u < num_nodes_; ++u)
        for (NodeId v : neighbors(u)) out.emplace_back(u, v);
    return out;
}

std::vector<std::vector<NodeId>> Graph::adjacency() const {
    std::vector<std::vector<NodeId>> out(num_nodes_);
    for (NodeId u = 0; u < num_nodes_; ++u) {
        auto row = neighbors(u);
        out[u].assign(row.begin(), row.end());
    }
    return out;
}

const char* to_string(Split s) noexcept {
    switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    }
    return "?";
}

std::optional<Split> parse_split(std::string_view text) noexcept {
    if (text == "train") return Split::train;
    if (text == "val") return Split::val;
    if (text == "test") return Split::test;
    return std::nullopt;
}

std::vector<NodeId> NodeTable::nodes_in(Split s) const {
    std::vector<NodeId> out;
    for (std::size_t v = 0; v < splits.size(); ++v)
        if (splits[v] == s) out.push_back(static_cast<NodeId>(v));
    return out;
}

void NodeTable::validate(const Graph* graph) const {
    const std::size_t n = labels.size();
    if (splits.size() != n) fail(kModule, "split tags and labels differ in length");
    if (features.rows() != n) fail(kModule, "feature rows differ from label count");
    if (graph && graph->num_nodes() != n) {
        fail(kModule, "node table has " + std::to_string(n) + " rows but graph has " +
                          std::to_string(graph->num_nodes()) + " nodes");
    }
    if (num_classes < 0) fail(kModule, "negative class count");
    for (std::size_t v = 0; v < n; ++v) {
        const int y = labels[v];
        if (y != kUnknownLabel && (y < 0 || y >= num_classes)) {
            fail(kModule, "node " + std::to_string(v) + " has label " + std::to_string(y) + " outside [0, " +
                              std::to_string(num_classes) + ")");
        }
        if (splits[v] == Split::train && y == kUnknownLabel) {
            fail(kModule, "train node " + std::to_string(v) + " has no label");
        }
    }
}

PositiveRatioReport positive_ratio(const Graph& g, const NodeTable& t, SplitSet use_splits) {
    const std::size_t n = g.num_nodes();
    PositiveRatioReport rep;
    rep.per_node.assign(n, std::nullopt);
    rep.positive_counts.assign(n, 0);
    rep.neighbor_counts.assign(n, 0);
    auto usable = [&](NodeId v) { return t.has_label(v) && use_splits.contains(t.splits[v]); };
    for (NodeId v = 0; v < n; ++v) {
        if (!usable(v)) continue;
        std::size_t pos = 0;
        std::size_t total = 0;
        for (NodeId u : g.neighbors(v)) {
            if (u == v || !usable(u)) continue;
            ++total;
            if (t.labels[u] == t.labels[v]) ++pos;
        }
        rep.positive_counts[v] = pos;
        rep.neighbor_counts[v] = total;
        if (total > 0) rep.per_node[v] = static_cast<double>(pos) / static_cast<double>(total);
        rep.positive_edges += pos;
        rep.counted_edges += total;
    }
    if (rep.counted_edges > 0) {
        rep.graph_ratio = static_cast<double>(rep.positive_edges) / static_cast<double>(rep.counted_edges);
    }
    return rep;
}

std::vector<NodeId> two_hop_candidates(const Graph& g, NodeId v) {
    if (v >= g.num_nodes()) fail(kModule, "node " + std::to_string(v) + " out of range");
    auto first = g.neighbors(v);
    std::vector<NodeId> out;
    for (NodeId u : first) {
        if (u == v) continue;
        for (NodeId w : g.neighbors(u)) {
            if (w == v || w == u) continue;
            if (std::binary_search(first.begin(), first.end(), w)) continue;
            out.push_back(w);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Graph degrade(const Graph& g, const NodeTable& t, std::size_t k, std::uint64_t seed) {
    if (k == 0) fail(kModule, "degrade requires k >= 1");
    if (t.num_nodes() != g.num_nodes()) fail(kModule, "node table does not match graph");
    const std::size_t n = g.num_nodes();
    for (NodeId v = 0; v < n; ++v) {
        if (!t.has_label(v)) fail(kModule, "degrade requires known labels; node " + std::to_string(v) + " has none");
    }
    const auto original = g.adjacency();
    auto adj = original;
    std::vector<std::vector<NodeId>> by_class(static_cast<std::size_t>(t.num_classes));
    for (NodeId v = 0; v < n; ++v) by_class[static_cast<std::size_t>(t.labels[v])].push_back(v);

    std::vector<NodeId> pool;
    for (NodeId v = 0; v < n; ++v) {
        pool.clear();
        // Eligibility is judged on the input graph, so a pick may coincide with
        // an edge another node already added toward v; it then collapses.
        const auto& own = original[v];
        for (int c = 0; c < t.num_classes; ++c) {
            if (c == t.labels[v]) continue;
            for (NodeId u : by_class[static_cast<std::size_t>(c)]) {
                if (!std::binary_search(own.begin(), own.end(), u)) pool.push_back(u);
            }
        }
        std::sort(pool.begin(), pool.end());
        if (pool.size() < k) {
            fail(kModule, "node " + std::to_string(v) + " has only " + std::to_string(pool.size()) +
                              " non-adjacent different-label nodes, " + std::to_string(k) + " requested");
        }
        Rng rng(derive_seed(seed, v));
        // Partial Fisher-Yates: the first k slots become a uniform k-subset.
        for (std::size_t i = 0; i < k; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
            std::swap(pool[i], pool[pick(rng)]);
            const NodeId u = pool[i];
            auto& row_v = adj[v];
            auto at = std::lower_bound(row_v.begin(), row_v.end(), u);
            if (at == row_v.end() || *at != u) row_v.insert(at, u);
            auto& row_u = adj[u];
            auto it = std::lower_bound(row_u.begin(), row_u.end(), v);
            if (it == row_u.end() || *it != v) row_u.insert(it, v);
        }
    }
    return Graph::from_adjacency(std::move(adj));
}

Dataset synth(const SynthParams& p) {
    if (p.num_classes < 1) fail(kModule, "synth needs at least one class");
    if (p.num_nodes < static_cast<std::size_t>(p.num_classes)) fail(kModule, "synth needs num_nodes >= num_classes");
    if (!(p.homophily >= 0.0 && p.homophily <= 1.0)) fail(kModule, "homophily must lie in [0, 1]");
    if (!(p.feature_sep >= 0.0)) fail(kModule, "feature_sep must be >= 0");
    if (!(p.avg_degree >= 1.0)) fail(kModule, "avg_degree must be >= 1");
    const std::size_t n = p.num_nodes;
    const auto c = static_cast<std::size_t>(p.num_classes);
    if (p.homophily < 1.0 && c < 2) fail(kModule, "homophily < 1 needs at least two classes");

    Rng rng(derive_seed(p.seed, 0x5157));

    Dataset d;
    NodeTable& t = d.table;
    t.num_classes = p.num_classes;
    t.labels.resize(n);
    for (std::size_t v = 0; v < n; ++v) t.labels[v] = static_cast<int>(v % c);
    std::shuffle(t.labels.begin(), t.labels.end(), rng);

    std::vector<std::vector<NodeId>> members(c);
    for (NodeId v = 0; v < n; ++v) members[static_cast<std::size_t>(t.labels[v])].push_back(v);

    // Edges: pick u uniformly, then an intra-class partner with probability
    // `homophily`, otherwise a partner from a uniformly chosen other class.
    const auto target_edges = static_cast<std::size_t>(std::llround(p.avg_degree * static_cast<double>(n) / 2.0));
    const std::size_t max_possible = n * (n - 1) / 2;
    std::vector<Edge> edges;
    std::vector<Edge> seen;
    {
        std::uniform_int_distribution<std::size_t> pick_node(0, n - 1);
        std::bernoulli_distribution intra(p.homophily);
        std::vector<std::vector<NodeId>> adj(n);
        std::size_t attempts = 0;
        const std::size_t want = std::min(target_edges, max_possible);
        while (edges.size() < want) {
            if (++attempts > 200 * want + 1000) fail(kModule, "synth could not place the requested edges");
            const auto u = static_cast<NodeId>(pick_node(rng));
            const auto cu = static_cast<std::size_t>(t.labels[u]);
            std::size_t cv = cu;
            if (!intra(rng)) {
                std::uniform_int_distribution<std::size_t> other(0, c - 2);
                cv = other(rng);
                if (cv >= cu) ++cv;
            }
            const auto& pool = members[cv];
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
            const NodeId v = pool[pick(rng)];
            if (v == u) continue;
            auto& row = adj[u];
            auto it = std::lower_bound(row.begin(), row.end(), v);
            if (it != row.end() && *it == v) continue;
            row.insert(it, v);
            auto& back = adj[v];
            back.insert(std::lower_bound(back.begin(), back.end(), u), u);
            edges.emplace_back(u, v);
        }
    }
    d.graph = Graph::from_edges(n, edges, true, true);

    // Class means: axis-aligned when C <= d, random unit directions otherwise;
    // either way scaled so distinct axis means sit feature_sep apart.
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix means(c, p.feature_dim, 0.0);
    const double scale = p.feature_sep / std::sqrt(2.0);
    for (std::size_t k = 0; k < c; ++k) {
        if (p.feature_dim == 0) break;
        if (c <= p.feature_dim) {
            means(k, k) = scale;
        } else {
            double norm = 0.0;
            for (std::size_t j = 0; j < p.feature_dim; ++j) {
                means(k, j) = gauss(rng);
                norm += means(k, j) * means(k, j);
            }
            norm = std::sqrt(norm);
            for (std::size_t j = 0; j < p.feature_dim; ++j) means(k, j) *= scale / norm;
        }
    }
    t.features = Matrix(n, p.feature_dim);
    for (NodeId v = 0; v < n; ++v) {
        const auto y = static_cast<std::size_t>(t.labels[v]);
        for (std::size_t j = 0; j < p.feature_dim; ++j) t.features(v, j) = means(y, j) + gauss(rng);
    }

    t.splits.assign(n, Split::test);
    for (auto& pool : members) {
        std::vector<NodeId> order = pool;
        std::shuffle(order.begin(), order.end(), rng);
        const std::size_t n_train = std::max<std::size_t>(1, (order.size() + 5) / 10);
        const std::size_t n_val = std::min(order.size() - n_train, (order.size() + 5) / 10);
        for (std::size_t i = 0; i < order.size(); ++i) {
            t.splits[order[i]] = i < n_train ? Split::train : (i < n_train + n_val ? Split::val : Split::test);
        }
    }
    t.validate(&d.graph);
    return d;
}

} // namespace lagcn
