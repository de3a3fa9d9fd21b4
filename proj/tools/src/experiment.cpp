#include "lagcn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "lagcn/error.hpp"
#include "lagcn/random.hpp"

namespace lagcn {

namespace {

constexpr const char* kModule = "cli";
using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

// ---------------------------------------------------------------------------
// JSON helpers

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) fail(kModule, "config section '" + where + "' must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        if (!ok.count(key)) fail(kModule, "unknown config key '" + where + "." + key + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        try {
            out = j.at(key).get<T>();
        } catch (const json::exception& e) {
            fail(kModule, std::string("config key '") + key + "': " + e.what());
        }
    }
}

Normalization read_norm(const json& j, const char* key, Normalization fallback) {
    if (!j.contains(key)) return fallback;
    return parse_normalization(j.at(key).get<std::string>());
}

std::string fmt(const std::optional<double>& v) {
    if (!v) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", *v);
    return buf;
}

std::string seed_text(std::uint64_t s) { return std::to_string(s); }

std::string grid_label(const char* name, double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s=%.2f", name, v);
    return buf;
}

// ---------------------------------------------------------------------------
// Arm evaluation

struct Timer {
    Clock::time_point start = Clock::now();
    double ms() const { return std::chrono::duration<double, std::milli>(Clock::now() - start).count(); }
};

struct Accuracies {
    double train = 0.0;
    std::optional<double> val;
    std::optional<double> test;
};

std::optional<double> split_accuracy(const std::vector<int>& pred, const NodeTable& t, Split s) {
    for (std::size_t v = 0; v < t.num_nodes(); ++v)
        if (t.splits[v] == s && t.labels[v] != kUnknownLabel) return accuracy(pred, t, s);
    return std::nullopt;
}

Accuracies fit_and_score(const ExperimentConfig& cfg, const Graph& g, const NodeTable& t, std::uint64_t seed) {
    FitConfig fit = cfg.model.fit;
    fit.seed = derive_seed(fit.seed, seed);
    std::vector<int> pred;
    if (cfg.model.kind == ModelConfig::Kind::sgc) {
        pred = predict(sgc_fit(g, t, fit, cfg.model.k), g, t);
    } else {
        pred = predict(gcn_fit(g, t, fit), g, t);
    }
    return {accuracy(pred, t, Split::train), split_accuracy(pred, t, Split::val), split_accuracy(pred, t, Split::test)};
}

/// Confusion of `scorer` decisions on `pairs`.
ClassifierQuality scorer_quality(const EdgeScorer& scorer, const PairSet& pairs, double threshold) {
    std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
    for (const auto& pr : pairs.pairs) {
        const bool predicted = scorer.score(pr.u, pr.v) >= threshold;
        if (pr.label == 1) {
            predicted ? ++tp : ++fn;
        } else {
            predicted ? ++fp : ++tn;
        }
    }
    return quality_from_counts(tp, fn, fp, tn);
}

/// Every unordered non-self 1-hop pair with both labels known.
PairSet all_edge_pairs(const Graph& g, const NodeTable& t) {
    PairSet out;
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        for (NodeId v : g.neighbors(u)) {
            if (v == u || (v < u && g.has_edge(v, u))) continue;
            if (!t.has_label(u) || !t.has_label(v)) continue;
            out.pairs.push_back({std::min(u, v), std::max(u, v), t.labels[u] == t.labels[v] ? 1 : 0,
                                 PairProvenance::one_hop});
        }
    }
    return out;
}

/// Fraction of same-label pairs among non-self edges present in `after` but not `before`.
std::optional<double> added_precision(const Graph& before, const Graph& after, const NodeTable& t) {
    std::size_t added = 0;
    std::size_t same = 0;
    for (NodeId u = 0; u < after.num_nodes(); ++u) {
        for (NodeId v : after.neighbors(u)) {
            if (v <= u || before.has_edge(u, v) || before.has_edge(v, u)) continue;
            if (!t.has_label(u) || !t.has_label(v)) continue;
            ++added;
            if (t.labels[u] == t.labels[v]) ++same;
        }
    }
    if (added == 0) return std::nullopt;
    return static_cast<double>(same) / static_cast<double>(added);
}

/// Trained classifier and the data it was trained on, for one seed.
struct TrainedScorer {
    Matrix features;
    EdgeClassifier classifier;
    ClassifierQuality heldout;
};

TrainedScorer train_scorer(const ExperimentConfig& cfg, const Dataset& d, std::uint64_t seed) {
    TrainedScorer ts;
    TrainConfig tc = cfg.edge_classifier;
    tc.seed = derive_seed(tc.seed, seed);
    ts.features = edge_input_features(d.graph, d.table, cfg.edge_features);
    const PairSet pairs = build_pairs(d.graph, d.table, tc);
    ts.classifier = train_edge_classifier(pairs, ts.features, tc);
    ts.heldout = evaluate_quality(ts.classifier, held_out_pairs(d.graph, d.table), ts.features, tc.threshold);
    return ts;
}

/// Collects rows per arm, then emits them grouped by arm with summary rows.
class RowCollector {
public:
    RowCollector(const ExperimentConfig& cfg, std::string experiment)
        : cfg_(cfg), experiment_(std::move(experiment)) {}

    MetricsRow& add(const std::string& arm, std::uint64_t seed) {
        auto it = std::find(arm_order_.begin(), arm_order_.end(), arm);
        if (it == arm_order_.end()) arm_order_.push_back(arm);
        auto& rows = rows_[arm];
        rows.push_back(MetricsRow{});
        MetricsRow& r = rows.back();
        r.experiment = experiment_;
        r.arm = arm;
        r.seed = seed_text(seed);
        return r;
    }

    void failed(const std::string& arm, std::uint64_t seed, const std::exception& e) {
        failed_.push_back(arm + "@seed" + seed_text(seed) + ": " + e.what());
    }

    /// Appends another collector's rows and failures after this one's.
    void absorb(const RowCollector& other) {
        for (const auto& arm : other.arm_order_) {
            if (std::find(arm_order_.begin(), arm_order_.end(), arm) == arm_order_.end()) arm_order_.push_back(arm);
            auto& mine = rows_[arm];
            const auto& theirs = other.rows_.at(arm);
            mine.insert(mine.end(), theirs.begin(), theirs.end());
        }
        failed_.insert(failed_.end(), other.failed_.begin(), other.failed_.end());
    }

    MetricsRecord finish() {
        MetricsRecord rec;
        rec.config_hash = config_hash(cfg_);
        rec.failed_arms = failed_;
        for (const auto& arm : arm_order_) {
            for (const auto& r : rows_[arm]) rec.rows.push_back(r);
        }
        for (const auto& arm : arm_order_) {
            const auto& rows = rows_[arm];
            MetricsRow mean{experiment_, arm, "mean"};
            MetricsRow sd{experiment_, arm, "std"};
            auto stat = [&](std::optional<double> MetricsRow::*field) {
                std::vector<double> xs;
                for (const auto& r : rows)
                    if (r.*field) xs.push_back(*(r.*field));
                if (xs.empty()) return;
                const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
                double ss = 0.0;
                for (double x : xs) ss += (x - m) * (x - m);
                mean.*field = m;
                sd.*field = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
            };
            for (auto f : {&MetricsRow::ratio_before, &MetricsRow::ratio_after, &MetricsRow::p, &MetricsRow::q,
                           &MetricsRow::p_pre, &MetricsRow::acc_train, &MetricsRow::acc_val, &MetricsRow::acc_test,
                           &MetricsRow::wall_ms}) {
                stat(f);
            }
            rec.rows.push_back(mean);
            rec.rows.push_back(sd);
        }
        return rec;
    }

private:
    const ExperimentConfig& cfg_;
    std::string experiment_;
    std::vector<std::string> arm_order_;
    std::map<std::string, std::vector<MetricsRow>> rows_;
    std::vector<std::string> failed_;
};

void fill_accuracy(MetricsRow& row, const Accuracies& acc) {
    row.acc_train = acc.train;
    row.acc_val = acc.val;
    row.acc_test = acc.test;
}

void fill_time(const ExperimentConfig& cfg, MetricsRow& row, const Timer& timer) {
    if (cfg.record_timing) row.wall_ms = timer.ms();
}

void origin_arm(const ExperimentConfig& cfg, RowCollector& rows, const std::string& arm, const Dataset& d,
                std::uint64_t seed) {
    Timer timer;
    try {
        const auto ratio = positive_ratio(d.graph, d.table).graph_ratio;
        const Accuracies acc = fit_and_score(cfg, d.graph, d.table, seed);
        MetricsRow& row = rows.add(arm, seed);
        row.ratio_before = ratio;
        row.ratio_after = ratio;
        fill_accuracy(row, acc);
        fill_time(cfg, row, timer);
    } catch (const std::exception& e) {
        rows.failed(arm, seed, e);
    }
}

/// Refines with `scorer`, trains the model on the result and records a row.
void refined_arm(const ExperimentConfig& cfg, RowCollector& rows, const std::string& arm, const Dataset& d,
                 std::uint64_t seed, const EdgeScorer& scorer, const RefinementConfig& rc,
                 const ClassifierQuality& quality, const std::string& flags = {}) {
    Timer timer;
    try {
        const Graph filtered = rc.do_filter ? filter_edges(d.graph, scorer, rc.threshold) : d.graph;
        RefinementReport report;
        const Graph refined = refine(d.graph, &d.table, scorer, rc, &report);
        const Accuracies acc = fit_and_score(cfg, refined, d.table, seed);
        MetricsRow& row = rows.add(arm, seed);
        row.ratio_before = report.ratio_before;
        row.ratio_after = report.ratio_after;
        if (rc.do_filter) {
            row.p = quality.p;
            row.q = quality.q;
        }
        if (rc.do_add) row.p_pre = added_precision(filtered, refined, d.table);
        row.flags = flags;
        fill_accuracy(row, acc);
        fill_time(cfg, row, timer);
    } catch (const std::exception& e) {
        rows.failed(arm, seed, e);
    }
}

RefinementConfig arm_config(const RefinementConfig& base, bool filter, bool add) {
    RefinementConfig rc = base;
    rc.do_filter = filter;
    rc.do_add = add;
    return rc;
}

void pipeline_seed(const ExperimentConfig& cfg, RowCollector& rows, const Dataset& d, std::uint64_t seed) {
    origin_arm(cfg, rows, "origin", d, seed);
    try {
        const TrainedScorer ts = train_scorer(cfg, d, seed);
        const ClassifierScorer scorer(ts.classifier, ts.features);
        refined_arm(cfg, rows, "la", d, seed, scorer, cfg.refinement, ts.heldout);
    } catch (const std::exception& e) {
        rows.failed("la", seed, e);
    }
}

void ablation_arms(const ExperimentConfig& cfg, RowCollector& rows, const Dataset& d, std::uint64_t seed,
                   const EdgeScorer& scorer, const ClassifierQuality& quality) {
    refined_arm(cfg, rows, "filter", d, seed, scorer, arm_config(cfg.refinement, true, false), quality);
    refined_arm(cfg, rows, "add", d, seed, scorer, arm_config(cfg.refinement, false, true), quality);
    refined_arm(cfg, rows, "filter+add", d, seed, scorer, arm_config(cfg.refinement, true, true), quality);
}


/// Runs `per_seed` for every seed, optionally on several threads, and merges
/// the per-seed rows in seed-list order so the output is independent of jobs.
template <typename Fn>
MetricsRecord run_seeds(const ExperimentConfig& cfg, const std::string& experiment, Fn per_seed) {
    cfg.validate();
    const std::size_t n = cfg.seeds.size();
    std::vector<RowCollector> parts;
    parts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) parts.emplace_back(cfg, experiment);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                per_seed(parts[i], cfg.seeds[i]);
            } catch (const std::exception& e) {
                parts[i].failed("all", cfg.seeds[i], e);
            }
        }
    };
    const std::size_t jobs = std::clamp<std::size_t>(cfg.jobs, 1, n);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    RowCollector all(cfg, experiment);
    for (const auto& part : parts) all.absorb(part);
    return all.finish();
}

} // namespace

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
    if (seeds.empty()) fail(kModule, "seeds must not be empty");
    if (jobs == 0) fail(kModule, "jobs must be >= 1");
    edge_classifier.validate();
    refinement.validate();
    model.fit.validate();
    if (model.k < 0) fail(kModule, "model.k must be >= 0");
    if (dataset.kind == DatasetConfig::Kind::files && (dataset.nodes.empty() || dataset.edges.empty())) {
        fail(kModule, "files dataset needs both 'nodes' and 'edges' paths");
    }
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    reject_unknown(j, {"name", "dataset", "edge_features", "edge_classifier", "refinement", "model", "sweep", "degrade",
                       "theory", "seeds", "output_dir", "record_timing", "jobs"},
                   "config");
    read(j, "name", cfg.name);
    read(j, "seeds", cfg.seeds);
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir").get<std::string>();
    read(j, "record_timing", cfg.record_timing);
    read(j, "jobs", cfg.jobs);

    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        reject_unknown(d, {"type", "nodes", "edges", "normalize_features", "undirected", "num_classes", "num_nodes",
                           "feature_dim", "homophily", "avg_degree", "feature_sep", "seed"},
                       "dataset");
        const std::string type = d.value("type", std::string("synth"));
        if (type == "synth") {
            cfg.dataset.kind = DatasetConfig::Kind::synth;
        } else if (type == "files") {
            cfg.dataset.kind = DatasetConfig::Kind::files;
        } else {
            fail(kModule, "dataset.type must be 'synth' or 'files'");
        }
        auto& s = cfg.dataset.synth;
        read(d, "num_nodes", s.num_nodes);
        read(d, "num_classes", s.num_classes);
        read(d, "feature_dim", s.feature_dim);
        read(d, "homophily", s.homophily);
        read(d, "avg_degree", s.avg_degree);
        read(d, "feature_sep", s.feature_sep);
        read(d, "seed", s.seed);
        if (d.contains("nodes")) cfg.dataset.nodes = d.at("nodes").get<std::string>();
        if (d.contains("edges")) cfg.dataset.edges = d.at("edges").get<std::string>();
        read(d, "normalize_features", cfg.dataset.load.normalize_features);
        read(d, "undirected", cfg.dataset.load.undirected);
        if (cfg.dataset.kind == DatasetConfig::Kind::files) read(d, "num_classes", cfg.dataset.load.num_classes);
    }
    if (j.contains("edge_features")) {
        const auto& e = j.at("edge_features");
        reject_unknown(e, {"raw", "k", "norm"}, "edge_features");
        read(e, "raw", cfg.edge_features.raw);
        read(e, "k", cfg.edge_features.k);
        cfg.edge_features.norm = read_norm(e, "norm", cfg.edge_features.norm);
    }
    if (j.contains("edge_classifier")) {
        const auto& e = j.at("edge_classifier");
        reject_unknown(e, {"learning_rate", "epochs", "batch_size", "proj_dim", "hidden_widths", "seed",
                           "class_weighting", "include_two_hop", "momentum", "weight_decay", "threshold", "sampled_pairs"},
                       "edge_classifier");
        auto& t = cfg.edge_classifier;
        read(e, "learning_rate", t.learning_rate);
        read(e, "epochs", t.epochs);
        read(e, "batch_size", t.batch_size);
        read(e, "proj_dim", t.proj_dim);
        read(e, "hidden_widths", t.hidden_widths);
        read(e, "seed", t.seed);
        read(e, "include_two_hop", t.include_two_hop);
        read(e, "momentum", t.momentum);
        read(e, "weight_decay", t.weight_decay);
        read(e, "threshold", t.threshold);
        read(e, "sampled_pairs", t.sampled_pairs);
        if (e.contains("class_weighting")) {
            const auto w = e.at("class_weighting").get<std::string>();
            if (w == "balanced") {
                t.class_weighting = ClassWeighting::balanced;
            } else if (w == "none") {
                t.class_weighting = ClassWeighting::none;
            } else {
                fail(kModule, "edge_classifier.class_weighting must be 'balanced' or 'none'");
            }
        }
    }
    if (j.contains("refinement")) {
        const auto& r = j.at("refinement");
        reject_unknown(r, {"threshold", "n_max", "do_filter", "do_add"}, "refinement");
        read(r, "threshold", cfg.refinement.threshold);
        read(r, "n_max", cfg.refinement.n_max);
        read(r, "do_filter", cfg.refinement.do_filter);
        read(r, "do_add", cfg.refinement.do_add);
    }
    if (j.contains("model")) {
        const auto& m = j.at("model");
        reject_unknown(m, {"type", "k", "learning_rate", "epochs", "weight_decay", "seed", "hidden_width", "momentum",
                           "norm", "patience"},
                       "model");
        const std::string type = m.value("type", std::string("sgc"));
        if (type == "sgc") {
            cfg.model.kind = ModelConfig::Kind::sgc;
        } else if (type == "gcn") {
            cfg.model.kind = ModelConfig::Kind::gcn;
            cfg.model.fit.learning_rate = 0.05;
        } else {
            fail(kModule, "model.type must be 'sgc' or 'gcn'");
        }
        read(m, "k", cfg.model.k);
        auto& f = cfg.model.fit;
        read(m, "learning_rate", f.learning_rate);
        read(m, "epochs", f.epochs);
        read(m, "weight_decay", f.weight_decay);
        read(m, "seed", f.seed);
        read(m, "hidden_width", f.hidden_width);
        read(m, "momentum", f.momentum);
        read(m, "patience", f.patience);
        f.norm = read_norm(m, "norm", f.norm);
    }
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        reject_unknown(s, {"p_minus_q", "p_pre", "n_max"}, "sweep");
        read(s, "p_minus_q", cfg.sweep.p_minus_q);
        read(s, "p_pre", cfg.sweep.p_pre);
        read(s, "n_max", cfg.sweep.n_max);
    }
    if (j.contains("degrade")) {
        const auto& d = j.at("degrade");
        reject_unknown(d, {"k"}, "degrade");
        read(d, "k", cfg.degrade_k);
    }
    if (j.contains("theory")) {
        const auto& t = j.at("theory");
        reject_unknown(t, {"trials", "seed", "mu_plus", "mu_minus", "sigma2", "tau", "n_plus", "n_minus", "p_minus_q",
                           "p_pre", "n_added"},
                       "theory");
        auto& s = cfg.theory.sweep;
        read(t, "trials", s.trials);
        read(t, "seed", s.seed);
        read(t, "mu_plus", s.mixture.mu_plus);
        read(t, "mu_minus", s.mixture.mu_minus);
        read(t, "sigma2", s.mixture.sigma2);
        read(t, "tau", s.mixture.tau);
        read(t, "n_plus", s.n_plus_values);
        read(t, "n_minus", s.n_minus_values);
        read(t, "p_minus_q", s.p_minus_q_values);
        read(t, "p_pre", s.p_pre_values);
        read(t, "n_added", s.n_added);
    }
    cfg.validate();
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["seeds"] = cfg.seeds;
    j["output_dir"] = cfg.output_dir.string();
    j["record_timing"] = cfg.record_timing;
    j["jobs"] = cfg.jobs;
    json d;
    if (cfg.dataset.kind == DatasetConfig::Kind::synth) {
        const auto& s = cfg.dataset.synth;
        d = {{"type", "synth"},           {"num_nodes", s.num_nodes},   {"num_classes", s.num_classes},
             {"feature_dim", s.feature_dim}, {"homophily", s.homophily}, {"avg_degree", s.avg_degree},
             {"feature_sep", s.feature_sep}, {"seed", s.seed}};
    } else {
        d = {{"type", "files"},
             {"nodes", cfg.dataset.nodes.string()},
             {"edges", cfg.dataset.edges.string()},
             {"normalize_features", cfg.dataset.load.normalize_features},
             {"undirected", cfg.dataset.load.undirected},
             {"num_classes", cfg.dataset.load.num_classes}};
    }
    j["dataset"] = d;
    j["edge_features"] = {{"raw", cfg.edge_features.raw},
                          {"k", cfg.edge_features.k},
                          {"norm", to_string(cfg.edge_features.norm)}};
    const auto& t = cfg.edge_classifier;
    j["edge_classifier"] = {{"learning_rate", t.learning_rate},
                            {"epochs", t.epochs},
                            {"batch_size", t.batch_size},
                            {"proj_dim", t.proj_dim},
                            {"hidden_widths", t.hidden_widths},
                            {"seed", t.seed},
                            {"class_weighting", t.class_weighting == ClassWeighting::balanced ? "balanced" : "none"},
                            {"include_two_hop", t.include_two_hop},
                            {"momentum", t.momentum},
                            {"weight_decay", t.weight_decay},
                            {"threshold", t.threshold},
                            {"sampled_pairs", t.sampled_pairs}};
    j["refinement"] = {{"threshold", cfg.refinement.threshold},
                       {"n_max", cfg.refinement.n_max},
                       {"do_filter", cfg.refinement.do_filter},
                       {"do_add", cfg.refinement.do_add}};
    const auto& f = cfg.model.fit;
    j["model"] = {{"type", cfg.model.kind == ModelConfig::Kind::sgc ? "sgc" : "gcn"},
                  {"k", cfg.model.k},
                  {"learning_rate", f.learning_rate},
                  {"epochs", f.epochs},
                  {"weight_decay", f.weight_decay},
                  {"seed", f.seed},
                  {"hidden_width", f.hidden_width},
                  {"momentum", f.momentum},
                  {"norm", to_string(f.norm)},
                  {"patience", f.patience}};
    j["sweep"] = {{"p_minus_q", cfg.sweep.p_minus_q}, {"p_pre", cfg.sweep.p_pre}, {"n_max", cfg.sweep.n_max}};
    j["degrade"] = {{"k", cfg.degrade_k}};
    const auto& s = cfg.theory.sweep;
    j["theory"] = {{"trials", s.trials},
                   {"seed", s.seed},
                   {"mu_plus", s.mixture.mu_plus},
                   {"mu_minus", s.mixture.mu_minus},
                   {"sigma2", s.mixture.sigma2},
                   {"tau", s.mixture.tau},
                   {"n_plus", s.n_plus_values},
                   {"n_minus", s.n_minus_values},
                   {"p_minus_q", s.p_minus_q_values},
                   {"p_pre", s.p_pre_values},
                   {"n_added", s.n_added}};
    return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
    json j = config_to_json(cfg);
    j.erase("output_dir");
    j.erase("record_timing");
    j.erase("jobs");
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------------------
// Records

std::vector<const MetricsRow*> MetricsRecord::arm_rows(const std::string& arm) const {
    std::vector<const MetricsRow*> out;
    for (const auto& r : rows)
        if (r.arm == arm && r.seed != "mean" && r.seed != "std") out.push_back(&r);
    return out;
}

const MetricsRow* MetricsRecord::summary(const std::string& arm, const std::string& stat) const {
    for (const auto& r : rows)
        if (r.arm == arm && r.seed == stat) return &r;
    return nullptr;
}

void write_metrics_csv(std::ostream& out, const MetricsRecord& record) {
    out << kMetricsHeader << '\n';
    for (const auto& r : record.rows) {
        out << r.experiment << ',' << r.arm << ',' << r.seed << ',' << fmt(r.ratio_before) << ',' << fmt(r.ratio_after)
            << ',' << fmt(r.p) << ',' << fmt(r.q) << ',' << fmt(r.p_pre) << ',' << fmt(r.acc_train) << ','
            << fmt(r.acc_val) << ',' << fmt(r.acc_test) << ',' << fmt(r.wall_ms) << ',' << record.config_hash << ','
            << r.flags << '\n';
    }
}

// ---------------------------------------------------------------------------
// Commands

Dataset materialize_dataset(const ExperimentConfig& cfg, std::uint64_t seed) {
    if (cfg.dataset.kind == DatasetConfig::Kind::files) {
        return load(cfg.dataset.nodes, cfg.dataset.edges, cfg.dataset.load);
    }
    SynthParams p = cfg.dataset.synth;
    p.seed = derive_seed(p.seed, seed);
    return synth(p);
}

MetricsRecord run_pipeline(const ExperimentConfig& cfg) {
    return run_seeds(cfg, "pipeline", [&](RowCollector& rows, std::uint64_t seed) {
        pipeline_seed(cfg, rows, materialize_dataset(cfg, seed), seed);
    });
}

MetricsRecord run_ablation(const ExperimentConfig& cfg) {
    return run_seeds(cfg, "ablation", [&](RowCollector& rows, std::uint64_t seed) {
        const Dataset d = materialize_dataset(cfg, seed);
        origin_arm(cfg, rows, "origin", d, seed);
        try {
            const TrainedScorer ts = train_scorer(cfg, d, seed);
            const ClassifierScorer scorer(ts.classifier, ts.features);
            ablation_arms(cfg, rows, d, seed, scorer, ts.heldout);
        } catch (const std::exception& e) {
            for (const char* arm : {"filter", "add", "filter+add"}) rows.failed(arm, seed, e);
        }
    });
}

MetricsRecord run_oracle_ablation(const ExperimentConfig& cfg) {
    return run_seeds(cfg, "oracle-ablation", [&](RowCollector& rows, std::uint64_t seed) {
        const Dataset d = materialize_dataset(cfg, seed);
        origin_arm(cfg, rows, "origin", d, seed);
        try {
            const OracleScorer scorer(d.table, OracleClassifier{1.0, 0.0, 1.0, seed});
            const auto quality = scorer_quality(scorer, all_edge_pairs(d.graph, d.table), cfg.refinement.threshold);
            ablation_arms(cfg, rows, d, seed, scorer, quality);
        } catch (const std::exception& e) {
            for (const char* arm : {"filter", "add", "filter+add"}) rows.failed(arm, seed, e);
        }
    });
}

MetricsRecord run_oracle_sweep(const ExperimentConfig& cfg, SweepKind kind) {
    constexpr double kInfeasibleGap = 0.05;
    return run_seeds(cfg, "sweep", [&](RowCollector& rows, std::uint64_t seed) {
        const Dataset d = materialize_dataset(cfg, seed);
        origin_arm(cfg, rows, "origin", d, seed);
        const PairSet edges = all_edge_pairs(d.graph, d.table);
        if (kind != SweepKind::p_pre) {
            for (double gap : cfg.sweep.p_minus_q) {
                const std::string arm = grid_label("p_minus_q", gap);
                try {
                    const OracleClassifier oc{(1.0 + gap) / 2.0, (1.0 - gap) / 2.0, 1.0, derive_seed(seed, 0xF17)};
                    const OracleScorer scorer(d.table, oc);
                    const auto quality = scorer_quality(scorer, edges, cfg.refinement.threshold);
                    refined_arm(cfg, rows, arm, d, seed, scorer, arm_config(cfg.refinement, true, false), quality);
                } catch (const std::exception& e) {
                    rows.failed(arm, seed, e);
                }
            }
        }
        if (kind != SweepKind::p_minus_q) {
            RefinementConfig rc = arm_config(cfg.refinement, false, true);
            if (cfg.sweep.n_max > 0) rc.n_max = cfg.sweep.n_max;
            for (double target : cfg.sweep.p_pre) {
                const std::string arm = grid_label("p_pre", target);
                try {
                    const OracleScorer scorer(d.table, OracleClassifier{1.0, 0.0, target, derive_seed(seed, 0xADD)});
                    const Graph refined = add_edges(d.graph, scorer, rc.n_max, rc.threshold);
                    const auto achieved = added_precision(d.graph, refined, d.table);
                    std::string flags;
                    if (!achieved || std::abs(*achieved - target) > kInfeasibleGap) flags = "p_pre_infeasible";
                    refined_arm(cfg, rows, arm, d, seed, scorer, rc, ClassifierQuality{}, flags);
                } catch (const std::exception& e) {
                    rows.failed(arm, seed, e);
                }
            }
        }
    });
}

MetricsRecord run_degradation(const ExperimentConfig& base, std::size_t k) {
    ExperimentConfig cfg = base;
    cfg.degrade_k = k;
    return run_seeds(cfg, "degrade", [&](RowCollector& rows, std::uint64_t seed) {
        Dataset d = materialize_dataset(cfg, seed);
        if (k > 0) {
            origin_arm(cfg, rows, "clean-origin", d, seed);
            d.graph = degrade(d.graph, d.table, k, derive_seed(seed, 0xDE6));
        }
        pipeline_seed(cfg, rows, d, seed);
    });
}

theory::PropositionReport run_theory(const ExperimentConfig& cfg, std::ostream& sweep_csv) {
    auto report = theory::check_propositions(theory::PropositionGrid::standard());
    theory::write_theory_sweep_csv(sweep_csv, cfg.theory.sweep, config_hash(cfg));
    return report;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) fail(kModule, "spearman needs two equal-length series of length >= 2");
    auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> r(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    const auto rx = ranks(x);
    const auto ry = ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

std::vector<std::pair<double, double>> sweep_curve(const MetricsRecord& record, const std::string& prefix) {
    std::vector<std::pair<double, double>> out;
    const std::string key = prefix + "=";
    for (const auto& r : record.rows) {
        if (r.seed != "mean" || r.arm.rfind(key, 0) != 0 || !r.acc_test) continue;
        out.emplace_back(std::stod(r.arm.substr(key.size())), *r.acc_test);
    }
    return out;
}

} // namespace lagcn
