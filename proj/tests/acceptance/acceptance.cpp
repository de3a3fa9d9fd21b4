// Acceptance suite: one PASS / FAIL / SKIP line per criterion. Exit code is
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lagcn/edge_classifier.hpp"
#include "lagcn/experiment.hpp"
#include "lagcn/models.hpp"
#include "lagcn/propagation.hpp"
#include "lagcn/random.hpp"
#include "lagcn/theory.hpp"
#include "support.hpp"

namespace {

using namespace lagcn;
using Clock = std::chrono::steady_clock;

enum class Status { pass, fail, skip };

struct Outcome {
    Status status;
    std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& body) {
    const auto start = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {Status::fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
    if (o.status == Status::fail) ++failures;
    std::printf("[%s] %d %s: %s (%.2f s)\n", tag, id, name, o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string format(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

Outcome verdict(bool ok, std::string detail) { return {ok ? Status::pass : Status::fail, std::move(detail)}; }

ExperimentConfig synthetic_config() {
    std::ifstream in(LAGCN_SYNTHETIC_CONFIG);
    if (!in) throw std::runtime_error("cannot open " LAGCN_SYNTHETIC_CONFIG);
    auto cfg = config_from_json(nlohmann::json::parse(in));
    cfg.jobs = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 2, cfg.seeds.size());
    return cfg;
}

double mean_of(const MetricsRecord& r, const std::string& arm) {
    const auto* row = r.summary(arm, "mean");
    if (!row || !row->acc_test) throw std::runtime_error("missing mean row for " + arm);
    return *row->acc_test;
}

std::string csv(const MetricsRecord& r) {
    std::ostringstream out;
    write_metrics_csv(out, r);
    return out.str();
}

std::string failed_arms(const MetricsRecord& r) {
    std::string s;
    for (const auto& a : r.failed_arms) s += (s.empty() ? "" : ", ") + a;
    return s;
}

// Shared between criteria so each experiment runs once.
theory::PropositionReport grid_report;
MetricsRecord pipeline_record;
MetricsRecord sweep_record;
MetricsRecord ablation_record;

Outcome filter_grid() {
    grid_report = theory::check_propositions(theory::PropositionGrid::standard());
    const auto& r = grid_report;
    const bool ok = r.filter_points > 0 && r.filter_violations == 0 && r.filter_converse_violations == 0 &&
                    r.filter_boundary_max_gap <= 1e-12 && r.monotone_violations == 0 && r.bound_violations == 0 &&
                    r.elapsed_ms < 1000.0;
    return verdict(ok, format("%zu points p>q, %zu violations, %zu converse violations, boundary gap %.1e, "
                              "monotone violations %zu, grid time %.0f ms",
                              r.filter_points, r.filter_violations, r.filter_converse_violations,
                              r.filter_boundary_max_gap, r.monotone_violations, r.elapsed_ms));
}

Outcome add_grid() {
    const auto& r = grid_report;
    const bool ok = r.add_points > 0 && r.add_violations == 0 && r.add_boundary_max_gap <= 1e-12 &&
                    r.elapsed_ms < 1000.0;
    return verdict(ok, format("%zu points off boundary, %zu violations, %zu boundary points with gap %.1e",
                              r.add_points, r.add_violations, r.add_boundary_points, r.add_boundary_max_gap));
}

Outcome monte_carlo() {
    constexpr std::size_t kPoints = 20;
    constexpr std::size_t kTrials = 100000;
    SplitMix64 rng(2024);
    const theory::GaussianMixtureParams gm{};
    std::size_t outside = 0;
    std::size_t se_bad = 0;
    double worst_z = 0.0;
    double worst_se_ratio = 0.0;
    double formula_gap = 0.0;
    for (std::size_t i = 0; i < kPoints; ++i) {
        const theory::NeighborhoodSpec spec{1 + rng() % 10, 1 + rng() % 10, 1 + rng() % 10};
        const double p = 0.05 + 0.95 * rng.uniform();
        const double q = 0.95 * rng.uniform();
        const double p_pre = rng.uniform();
        const struct {
            theory::SimMode mode;
            double expected;
        } cases[] = {
            {theory::SimMode::origin(), theory::e_origin({spec.n_plus, spec.n_minus, 0}, gm)},
            {theory::SimMode::filter(p, q), *theory::e_filter_exact({spec.n_plus, spec.n_minus, 0}, gm, p, q)},
            {theory::SimMode::add(p_pre), theory::e_add(spec, gm, p_pre)},
        };
        formula_gap = std::max(formula_gap, std::abs(*theory::e_filter({spec.n_plus, spec.n_minus, 0}, gm, p, q) -
                                                     cases[1].expected));
        for (const auto& c : cases) {
            const auto sim_spec = c.mode.mode == theory::Mode::add ? spec
                                                                   : theory::NeighborhoodSpec{spec.n_plus, spec.n_minus, 0};
            const std::uint64_t seed = derive_seed(7, i, static_cast<std::uint64_t>(c.mode.mode));
            const auto one = theory::mc_aggregate(sim_spec, gm, c.mode, kTrials, seed);
            const auto two = theory::mc_aggregate(sim_spec, gm, c.mode, 2 * kTrials, seed);
            const double z = std::abs(one.mean - c.expected) / one.std_error;
            worst_z = std::max(worst_z, z);
            if (z > 3.0) ++outside;
            const double ratio = one.std_error / two.std_error / std::sqrt(2.0);
            worst_se_ratio = std::max(worst_se_ratio, std::abs(ratio - 1.0));
            if (std::abs(ratio - 1.0) > 0.10) ++se_bad;
        }
    }
    // Allow the rare 3 SE excursion expected from 60 comparisons.
    const bool ok = outside <= 1 && se_bad == 0;
    return verdict(ok, format("%zu/%zu estimates beyond 3 SE (max %.2f SE), SE halving deviation max %.1f%%, "
                              "ratio-of-expectations vs exact filter gap up to %.4f",
                              outside, 3 * kPoints, worst_z, 100.0 * worst_se_ratio, formula_gap));
}

void randomize(std::vector<std::span<double>> params, std::uint64_t seed) {
    SplitMix64 rng(seed);
    for (auto p : params)
        for (double& x : p) x = rng.uniform() - 0.5;
}

Outcome gradients() {
    SynthParams sp;
    sp.num_nodes = 24;
    sp.num_classes = 3;
    sp.feature_dim = 5;
    sp.avg_degree = 3;
    sp.seed = 11;
    Dataset d = synth(sp);
    for (NodeId v = 0; v < d.table.num_nodes(); ++v) d.table.splits[v] = v % 2 ? Split::train : Split::test;
    const auto nodes = d.table.nodes_in(Split::train);

    TrainConfig tc;
    tc.proj_dim = 4;
    tc.hidden_widths = {5, 3};
    tc.seed = 3;
    EdgeClassifier c = EdgeClassifier::initialize(d.table.features.cols(), tc);
    const PairSet ps = build_pairs(d.graph, d.table, tc);
    std::vector<std::size_t> idx(ps.size());
    std::iota(idx.begin(), idx.end(), 0);
    const auto w = class_weights(ps, ClassWeighting::balanced);
    EdgeClassifier cg;
    edge_loss(c, ps, d.table.features, idx, w, &cg);
    const double e_edge = testing::max_fd_error(
        c.parameters(), cg.parameters(), [&] { return edge_loss(c, ps, d.table.features, idx, w, nullptr); }, 20, 1);

    const Matrix z = propagate(d.graph, d.table.features, {2});
    SgcModel s = sgc_initialize(sp.feature_dim, sp.num_classes, 2, {});
    randomize(s.parameters(), 2);
    SgcModel sg;
    sgc_loss(s, z, d.table, nodes, 0.01, &sg);
    const double e_sgc = testing::max_fd_error(
        s.parameters(), sg.parameters(), [&] { return sgc_loss(s, z, d.table, nodes, 0.01, nullptr); }, 20, 2);

    FitConfig fc;
    fc.hidden_width = 6;
    fc.seed = 3;
    const Matrix ax = aggregate(d.graph, d.table.features, fc.norm);
    GcnModel g = gcn_initialize(sp.feature_dim, sp.num_classes, fc);
    GcnModel gg;
    gcn_loss(g, &d.graph, ax, d.table, nodes, 0.01, &gg);
    const double e_gcn = testing::max_fd_error(
        g.parameters(), gg.parameters(), [&] { return gcn_loss(g, &d.graph, ax, d.table, nodes, 0.01, nullptr); },
        20, 3);

    const bool ok = e_edge < 1e-4 && e_sgc < 1e-4 && e_gcn < 1e-4;
    return verdict(ok, format("max relative error over 20 coordinates: edge classifier %.1e, SGC %.1e, GCN %.1e",
                              e_edge, e_sgc, e_gcn));
}

Outcome synthetic_pipeline() {
    const auto cfg = synthetic_config();
    const auto start = Clock::now();
    pipeline_record = run_pipeline(cfg);
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const auto& r = pipeline_record;
    if (!r.failed_arms.empty()) return {Status::fail, "failed arms: " + failed_arms(r)};
    const auto* la = r.summary("la", "mean");
    const double gap = *la->p - *la->q;
    double worst_gap = 1.0;
    for (const auto* row : r.arm_rows("la"))
        if (row->seed != "mean" && row->seed != "std") worst_gap = std::min(worst_gap, *row->p - *row->q);
    const double gain = *la->ratio_after - *la->ratio_before;
    const double origin = mean_of(r, "origin");
    const double refined = mean_of(r, "la");
    const bool ok = gap >= 0.3 && gain >= 0.10 && refined >= origin + 0.03 && secs < 120.0;
    return verdict(ok, format("held-out p-q %.3f (worst seed %.3f), ratio %.3f -> %.3f, test acc origin %.4f vs "
                              "refined %.4f over %zu seeds in %.1f s",
                              gap, worst_gap, *la->ratio_before, *la->ratio_after, origin, refined, cfg.seeds.size(),
                              secs));
}

Outcome sweep_correlation() {
    const auto cfg = synthetic_config();
    sweep_record = run_oracle_sweep(cfg, SweepKind::both);
    if (!sweep_record.failed_arms.empty()) return {Status::fail, "failed arms: " + failed_arms(sweep_record)};
    auto rho = [&](const std::string& prefix, std::string& shape) {
        const auto curve = sweep_curve(sweep_record, prefix);
        std::vector<double> x, y;
        for (const auto& [k, acc] : curve) {
            x.push_back(k);
            y.push_back(acc);
            shape += format("%s%.3f", shape.empty() ? "" : " ", acc);
        }
        return spearman(x, y);
    };
    std::string a, b;
    const double r1 = rho("p_minus_q", a);
    const double r2 = rho("p_pre", b);
    for (const auto& row : sweep_record.rows)
        if (row.flags.find("p_pre_infeasible") != std::string::npos)
            return {Status::fail, "oracle could not reach p_pre target for " + row.arm};
    return verdict(r1 >= 0.9 && r2 >= 0.9,
                   format("spearman p-q %.3f [%s], p_pre %.3f [%s]", r1, a.c_str(), r2, b.c_str()));
}

Outcome ablation_order() {
    const auto cfg = synthetic_config();
    ablation_record = run_ablation(cfg);
    if (!ablation_record.failed_arms.empty()) return {Status::fail, "failed arms: " + failed_arms(ablation_record)};
    const double f = mean_of(ablation_record, "filter");
    const double a = mean_of(ablation_record, "add");
    const double fa = mean_of(ablation_record, "filter+add");
    const double o = mean_of(ablation_record, "origin");
    return verdict(fa >= std::max(f, a) - 0.01,
                   format("test acc origin %.4f, filter %.4f, add %.4f, filter+add %.4f", o, f, a, fa));
}

Outcome cora() {
    const char* dir = std::getenv("LAGCN_CORA_DIR");
    if (!dir || !*dir) return {Status::skip, "LAGCN_CORA_DIR not set; no citation data available"};
    std::ifstream in(LAGCN_CORA_CONFIG);
    auto cfg = config_from_json(nlohmann::json::parse(in));
    cfg.dataset.kind = DatasetConfig::Kind::files;
    cfg.dataset.nodes = std::filesystem::path(dir) / "nodes.tsv";
    cfg.dataset.edges = std::filesystem::path(dir) / "edges.tsv";
    cfg.jobs = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, cfg.seeds.size());
    const auto r = run_pipeline(cfg);
    if (!r.failed_arms.empty()) return {Status::fail, "failed arms: " + failed_arms(r)};
    const double origin = mean_of(r, "origin");
    const double refined = mean_of(r, "la");
    const auto* la = r.summary("la", "mean");
    const bool ok = std::abs(origin - 0.821) <= 0.03 && refined >= origin &&
                    std::abs(*la->ratio_before - 0.85) <= 0.02 && *la->ratio_after >= *la->ratio_before;
    return verdict(ok, format("origin SGC %.4f, refined %.4f, ratio %.3f -> %.3f", origin, refined,
                              *la->ratio_before, *la->ratio_after));
}

Outcome determinism() {
    auto cfg = synthetic_config();
    const std::string parallel = csv(pipeline_record);
    const std::string rerun = csv(run_pipeline(cfg));
    cfg.jobs = 1;
    const std::string serial = csv(run_pipeline(cfg));
    const std::string sweep_serial = csv(run_oracle_sweep(cfg, SweepKind::both));

    auto theory_csv = [&] {
        std::ostringstream out;
        theory::SweepOptions opts = cfg.theory.sweep;
        opts.trials = 2000;
        theory::write_theory_sweep_csv(out, opts, config_hash(cfg));
        return out.str();
    };
    const bool same_rerun = parallel == rerun;
    const bool same_jobs = parallel == serial && sweep_serial == csv(sweep_record);
    const bool same_theory = theory_csv() == theory_csv();
    return verdict(same_rerun && same_jobs && same_theory,
                   format("rerun identical: %s, jobs=1 vs jobs=%zu identical: %s, theory sweep identical: %s",
                          same_rerun ? "yes" : "no", synthetic_config().jobs, same_jobs ? "yes" : "no",
                          same_theory ? "yes" : "no"));
}

Outcome degradation() {
    const auto cfg = synthetic_config();
    const auto r = run_degradation(cfg, 3);
    if (!r.failed_arms.empty()) return {Status::fail, "failed arms: " + failed_arms(r)};
    const double clean = mean_of(r, "clean-origin");
    const double origin = mean_of(r, "origin");
    const double refined = mean_of(r, "la");
    return verdict(refined >= origin + 0.05,
                   format("k=3: clean origin %.4f, degraded origin %.4f, refined %.4f", clean, origin, refined));
}

} // namespace

int main() {
    report(1, "filtering beats the original neighborhood whenever p > q", filter_grid);
    report(2, "adding helps exactly when p_pre exceeds the positive ratio", add_grid);
    report(3, "Monte Carlo agrees with closed-form expectations", monte_carlo);
    report(4, "analytic gradients match finite differences", gradients);
    report(5, "synthetic benchmark: classifier quality, ratio gain and accuracy gain", synthetic_pipeline);
    report(6, "oracle sweeps: accuracy rises with p-q and with p_pre", sweep_correlation);
    report(7, "filter+add is at least as good as either alone", ablation_order);
    report(8, "citation benchmark reproduces the reference numbers", cora);
    report(9, "runs are deterministic and independent of parallelism", determinism);
    report(10, "refinement recovers from injected different-label edges", degradation);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
