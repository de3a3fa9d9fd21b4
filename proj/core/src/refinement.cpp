#include "lagcn/refinement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lagcn/error.hpp"
#include "lagcn/random.hpp"

namespace lagcn {

namespace {

constexpr const char* kModule = "refinement";

bool contains_sorted(const std::vector<NodeId>& row, NodeId v) {
    return std::binary_search(row.begin(), row.end(), v);
}

void insert_sorted(std::vector<NodeId>& row, NodeId v) {
    auto it = std::lower_bound(row.begin(), row.end(), v);
    if (it == row.end() || *it != v) row.insert(it, v);
}

std::size_t non_self_degree(const std::vector<NodeId>& row, NodeId v) {
    return row.size() - (contains_sorted(row, v) ? 1 : 0);
}

} // namespace

std::vector<double> EdgeScorer::score_pool(NodeId v, std::span<const NodeId> pool) const {
    std::vector<double> out;
    out.reserve(pool.size());
    for (NodeId u : pool) out.push_back(score(v, u));
    return out;
}

ClassifierScorer::ClassifierScorer(const EdgeClassifier& classifier, const Matrix& features)
    : classifier_(&classifier), embeddings_(classifier.project(features)) {}

double ClassifierScorer::score(NodeId u, NodeId v) const {
    return classifier_->score_projected(embeddings_.row(u), embeddings_.row(v));
}

void OracleClassifier::validate() const {
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!in_unit(target_p) || !in_unit(target_q) || !in_unit(target_p_pre)) {
        fail(kModule, "oracle targets must lie in [0, 1]");
    }
}

OracleScorer::OracleScorer(const NodeTable& t, const OracleClassifier& oc) : table_(&t), oc_(oc) {
    oc_.validate();
    for (NodeId v = 0; v < t.num_nodes(); ++v) {
        if (!t.has_label(v)) fail(kModule, "oracle scorer needs every label; node " + std::to_string(v) + " is unknown");
    }
}

double OracleScorer::score(NodeId u, NodeId v) const {
    const double coin = unit_interval(derive_seed(oc_.seed, std::min(u, v), std::max(u, v)));
    const bool same = table_->labels[u] == table_->labels[v];
    return coin < (same ? oc_.target_p : oc_.target_q) ? 1.0 : 0.0;
}

std::vector<double> OracleScorer::score_pool(NodeId v, std::span<const NodeId> pool) const {
    // Weighted interleave: the i-th same-label candidate sits at position
    // (i + phase)/p_pre, the j-th different-label one at (j + phase')/(1 - p_pre).
    // Scores decrease with position and stay in (0.5, 1]; a zero rate maps to 0.
    std::vector<std::size_t> pos_idx;
    std::vector<std::size_t> neg_idx;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        (table_->labels[pool[i]] == table_->labels[v] ? pos_idx : neg_idx).push_back(i);
    }
    SplitMix64 rng(derive_seed(oc_.seed, 0xADD, v));
    std::shuffle(pos_idx.begin(), pos_idx.end(), rng);
    std::shuffle(neg_idx.begin(), neg_idx.end(), rng);
    const double phase_pos = rng.uniform();
    const double phase_neg = rng.uniform();

    std::vector<double> out(pool.size(), 0.0);
    auto assign = [&](const std::vector<std::size_t>& idx, double rate, double phase) {
        if (rate <= 0.0) return;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const double position = (static_cast<double>(i) + phase) / rate;
            out[idx[i]] = 0.5 + 0.5 / (1.0 + position);
        }
    };
    assign(pos_idx, oc_.target_p_pre, phase_pos);
    assign(neg_idx, 1.0 - oc_.target_p_pre, phase_neg);
    return out;
}

void RefinementConfig::validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) fail(kModule, "threshold must lie in [0, 1]");
    if (do_add && n_max < 1) fail(kModule, "n_max must be >= 1 when adding");
}

std::map<std::size_t, std::size_t> degree_histogram(const Graph& g) {
    std::map<std::size_t, std::size_t> h;
    for (NodeId v = 0; v < g.num_nodes(); ++v) ++h[g.degree_without_self(v)];
    return h;
}

Graph filter_edges(const Graph& g, const EdgeScorer& scorer, double threshold, RefinementReport* report) {
    std::vector<Edge> removed;
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        for (NodeId v : g.neighbors(u)) {
            if (v == u) continue;
            if (v < u && g.has_edge(v, u)) continue; // pair already scored from v's row
            if (scorer.score(u, v) < threshold) removed.emplace_back(std::min(u, v), std::max(u, v));
        }
    }
    std::sort(removed.begin(), removed.end());
    std::vector<std::vector<NodeId>> adj(g.num_nodes());
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        for (NodeId v : g.neighbors(u)) {
            if (u != v && std::binary_search(removed.begin(), removed.end(), Edge{std::min(u, v), std::max(u, v)})) {
                continue;
            }
            adj[u].push_back(v);
        }
    }
    Graph out = Graph::from_adjacency(std::move(adj));
    if (report) {
        report->edges_before = g.num_edges();
        report->edges_removed = g.num_edges() - out.num_edges();
        report->edges_added = 0;
        report->edges_after = out.num_edges();
        report->degree_histogram_before = degree_histogram(g);
        report->degree_histogram_after = degree_histogram(out);
    }
    return out;
}

Graph add_edges(const Graph& g, const EdgeScorer& scorer, std::size_t n_max, double threshold,
                RefinementReport* report) {
    auto adj = g.adjacency();
    std::size_t capacity = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const std::size_t d = g.degree_without_self(v);
        capacity += d < n_max ? n_max - d : 0;
    }
    std::vector<std::size_t> order;
    std::size_t promoted = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        std::size_t degree = non_self_degree(adj[v], v);
        if (degree >= n_max) continue;
        const auto pool = two_hop_candidates(g, v);
        if (pool.empty()) continue;
        const auto scores = scorer.score_pool(v, pool);
        order.resize(pool.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return pool[a] < pool[b];
        });
        for (std::size_t i : order) {
            if (degree >= n_max || scores[i] < threshold) break;
            const NodeId u = pool[i];
            if (contains_sorted(adj[v], u)) continue; // became a neighbor passively
            insert_sorted(adj[v], u);
            insert_sorted(adj[u], v);
            ++degree;
            ++promoted;
        }
    }
    Graph out = Graph::from_adjacency(std::move(adj));
    if (report) {
        report->edges_before = g.num_edges();
        report->edges_removed = 0;
        report->edges_added = out.num_edges() - g.num_edges();
        report->edges_after = out.num_edges();
        report->add_capacity = capacity;
        report->pairs_added = promoted;
        report->degree_histogram_before = degree_histogram(g);
        report->degree_histogram_after = degree_histogram(out);
    }
    return out;
}

Graph refine(const Graph& g, const NodeTable* t, const EdgeScorer& scorer, const RefinementConfig& cfg,
             RefinementReport* report) {
    cfg.validate();
    RefinementReport filter_rep;
    RefinementReport add_rep;
    Graph current = g;
    if (cfg.do_filter) current = filter_edges(current, scorer, cfg.threshold, &filter_rep);
    if (cfg.do_add) current = add_edges(current, scorer, cfg.n_max, cfg.threshold, &add_rep);
    if (report) {
        RefinementReport r;
        r.edges_before = g.num_edges();
        r.edges_removed = cfg.do_filter ? filter_rep.edges_removed : 0;
        r.edges_added = cfg.do_add ? add_rep.edges_added : 0;
        r.edges_after = current.num_edges();
        r.add_capacity = cfg.do_add ? add_rep.add_capacity : 0;
        r.pairs_added = cfg.do_add ? add_rep.pairs_added : 0;
        r.degree_histogram_before = degree_histogram(g);
        r.degree_histogram_after = degree_histogram(current);
        if (t) {
            r.ratio_before = positive_ratio(g, *t).graph_ratio;
            r.ratio_after = positive_ratio(current, *t).graph_ratio;
        }
        *report = std::move(r);
    }
    return current;
}

Graph refine(const Graph& g, const NodeTable& t, const EdgeClassifier& classifier, const Matrix& features,
             const RefinementConfig& cfg, RefinementReport* report) {
    const ClassifierScorer scorer(classifier, features);
    return refine(g, &t, scorer, cfg, report);
}

} // namespace lagcn
