#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "lagcn/checkpoint.hpp"
#include "lagcn/error.hpp"
#include "lagcn/experiment.hpp"
#include "lagcn/graph_io.hpp"
#include "lagcn/random.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
    std::string config_path;
    std::vector<std::uint64_t> seeds;
    std::string output_dir;
    std::string dataset_dir;
    std::size_t jobs = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seeds, "Seed(s); overrides the config's seeds");
    cmd->add_option("--output-dir", f.output_dir, "Output directory; overrides config and LAGCN_OUTPUT_DIR");
    cmd->add_option("--dataset", f.dataset_dir, "Directory holding nodes.tsv and edges.tsv")
        ->check(CLI::ExistingDirectory);
    cmd->add_option("--jobs", f.jobs, "Seeds evaluated in parallel (output is unaffected)")->check(CLI::PositiveNumber);
}

lagcn::ExperimentConfig resolve(const CommonFlags& f) {
    json j = json::object();
    if (!f.config_path.empty()) {
        std::ifstream in(f.config_path);
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw lagcn::Error("cli", "cannot parse " + f.config_path + ": " + e.what());
        }
    }
    if (!j.contains("output_dir")) {
        if (const char* env = std::getenv("LAGCN_OUTPUT_DIR"); env && *env) j["output_dir"] = env;
    }
    if (!f.output_dir.empty()) j["output_dir"] = f.output_dir;
    if (!f.seeds.empty()) j["seeds"] = f.seeds;
    if (f.jobs > 0) j["jobs"] = f.jobs;
    if (!f.dataset_dir.empty()) {
        json d = j.value("dataset", json::object());
        for (const char* key : {"num_nodes", "feature_dim", "homophily", "avg_degree", "feature_sep", "seed"}) d.erase(key);
        d["type"] = "files";
        d["nodes"] = (fs::path(f.dataset_dir) / "nodes.tsv").string();
        d["edges"] = (fs::path(f.dataset_dir) / "edges.tsv").string();
        j["dataset"] = d;
    }
    return lagcn::config_from_json(j);
}

fs::path prepare_output(const lagcn::ExperimentConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    std::ofstream(cfg.output_dir / "config.json") << lagcn::config_to_json(cfg).dump(2) << '\n';
    return cfg.output_dir;
}

int emit(const lagcn::ExperimentConfig& cfg, const lagcn::MetricsRecord& rec, const std::string& file) {
    const fs::path out = prepare_output(cfg) / file;
    std::ofstream csv(out);
    lagcn::write_metrics_csv(csv, rec);
    std::cout << "wrote " << out.string() << " (" << rec.rows.size() << " rows, config " << rec.config_hash << ")\n";
    if (!rec.failed_arms.empty()) {
        std::cerr << rec.failed_arms.size() << " arm(s) failed:\n";
        for (const auto& f : rec.failed_arms) std::cerr << "  " << f << '\n';
        return 1;
    }
    return 0;
}

json report_json(const lagcn::RefinementReport& r) {
    auto hist = [](const std::map<std::size_t, std::size_t>& h) {
        json o = json::object();
        for (const auto& [deg, count] : h) o[std::to_string(deg)] = count;
        return o;
    };
    json j = {{"edges_before", r.edges_before}, {"edges_removed", r.edges_removed}, {"edges_added", r.edges_added},
              {"edges_after", r.edges_after},   {"pairs_added", r.pairs_added},     {"add_capacity", r.add_capacity},
              {"degree_histogram_before", hist(r.degree_histogram_before)},
              {"degree_histogram_after", hist(r.degree_histogram_after)}};
    j["ratio_before"] = r.ratio_before ? json(*r.ratio_before) : json(nullptr);
    j["ratio_after"] = r.ratio_after ? json(*r.ratio_after) : json(nullptr);
    return j;
}

/// Trains the edge classifier for the first seed and writes the refined graph.
int run_refine(const lagcn::ExperimentConfig& cfg) {
    const std::uint64_t seed = cfg.seeds.front();
    const lagcn::Dataset d = lagcn::materialize_dataset(cfg, seed);
    lagcn::TrainConfig tc = cfg.edge_classifier;
    tc.seed = lagcn::derive_seed(tc.seed, seed);
    const lagcn::Matrix features = lagcn::edge_input_features(d.graph, d.table, cfg.edge_features);
    const auto classifier = lagcn::train_edge_classifier(lagcn::build_pairs(d.graph, d.table, tc), features, tc);
    lagcn::RefinementReport report;
    const lagcn::Graph refined = lagcn::refine(d.graph, d.table, classifier, features, cfg.refinement, &report);

    const fs::path dir = prepare_output(cfg);
    lagcn::save_edges(dir / "refined_edges.tsv", refined);
    lagcn::save_checkpoint(dir / "edge_classifier.ckpt", lagcn::to_checkpoint(classifier));
    json j = report_json(report);
    const auto quality =
        lagcn::evaluate_quality(classifier, lagcn::held_out_pairs(d.graph, d.table), features, tc.threshold);
    for (const auto& [key, value] : {std::pair{"p", quality.p}, {"q", quality.q}, {"p_pre", quality.p_pre}})
        j[key] = value ? json(*value) : json(nullptr);
    std::ofstream(dir / "refinement_report.json") << j.dump(2) << '\n';
    std::cout << "wrote " << (dir / "refined_edges.tsv").string() << '\n';
    return 0;
}

int run_theory_cmd(const lagcn::ExperimentConfig& cfg) {
    const fs::path dir = prepare_output(cfg);
    std::ofstream csv(dir / "theory_sweep.csv");
    const auto r = lagcn::run_theory(cfg, csv);
    std::cout << "filter: " << r.filter_points << " points, " << r.filter_violations << " violations, boundary gap "
              << r.filter_boundary_max_gap << ", converse violations " << r.filter_converse_violations << '\n'
              << "add: " << r.add_points << " points, " << r.add_violations << " violations, boundary gap "
              << r.add_boundary_max_gap << '\n'
              << "monotonicity violations " << r.monotone_violations << ", bound violations " << r.bound_violations
              << ", " << r.elapsed_ms << " ms\n";
    for (const auto& c : r.counterexamples) {
        std::cout << "counterexample " << c.proposition << ": n+=" << c.n_plus << " n-=" << c.n_minus
                  << " n'=" << c.n_added << " p=" << c.p << " q=" << c.q << " p_pre=" << c.p_pre << " lhs=" << c.lhs
                  << " rhs=" << c.rhs << '\n';
    }
    std::cout << "wrote " << (dir / "theory_sweep.csv").string() << '\n';
    return r.ok() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Label-aware graph refinement for GCN node classification"};
    app.require_subcommand(1);

    CommonFlags flags;
    auto* pipeline = app.add_subcommand("pipeline", "Origin vs label-aware model");
    auto* ablation = app.add_subcommand("ablation", "Origin, filter-only, add-only and filter+add arms");
    auto* sweep = app.add_subcommand("sweep", "Oracle sweeps over p-q and p_pre");
    auto* degrade = app.add_subcommand("degrade", "Inject different-label edges, then compare");
    auto* theory = app.add_subcommand("theory", "Check the aggregation propositions and write MC sweeps");
    auto* synth = app.add_subcommand("synth", "Write a generated dataset as TSV");
    auto* refine = app.add_subcommand("refine", "Train the edge classifier and write the refined graph");
    for (auto* cmd : {pipeline, ablation, sweep, degrade, theory, synth, refine}) add_common(cmd, flags);

    bool oracle = false;
    ablation->add_flag("--oracle", oracle, "Use a perfect oracle scorer instead of the trained classifier");
    std::string grid = "both";
    sweep->add_option("--grid", grid, "p_minus_q, p_pre or both")
        ->check(CLI::IsMember({"p_minus_q", "p_pre", "both"}));
    std::optional<std::size_t> degrade_k;
    degrade->add_option("--k", degrade_k, "Different-label neighbors added per node");

    CLI11_PARSE(app, argc, argv);

    try {
        const lagcn::ExperimentConfig cfg = resolve(flags);
        if (*pipeline) return emit(cfg, lagcn::run_pipeline(cfg), "pipeline.csv");
        if (*ablation) {
            return oracle ? emit(cfg, lagcn::run_oracle_ablation(cfg), "oracle_ablation.csv")
                          : emit(cfg, lagcn::run_ablation(cfg), "ablation.csv");
        }
        if (*sweep) {
            const auto kind = grid == "p_minus_q" ? lagcn::SweepKind::p_minus_q
                              : grid == "p_pre"   ? lagcn::SweepKind::p_pre
                                                  : lagcn::SweepKind::both;
            return emit(cfg, lagcn::run_oracle_sweep(cfg, kind), "sweep.csv");
        }
        if (*degrade) return emit(cfg, lagcn::run_degradation(cfg, degrade_k.value_or(cfg.degrade_k)), "degrade.csv");
        if (*theory) return run_theory_cmd(cfg);
        if (*refine) return run_refine(cfg);
        if (*synth) {
            const fs::path dir = prepare_output(cfg);
            const lagcn::Dataset d = lagcn::materialize_dataset(cfg, cfg.seeds.front());
            lagcn::save(dir / "nodes.tsv", dir / "edges.tsv", d);
            std::cout << "wrote " << (dir / "nodes.tsv").string() << " and " << (dir / "edges.tsv").string() << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
