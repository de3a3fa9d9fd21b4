#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lagcn/edge_classifier.hpp"
#include "lagcn/graph.hpp"
#include "lagcn/graph_io.hpp"
#include "lagcn/models.hpp"
#include "lagcn/propagation.hpp"
#include "lagcn/refinement.hpp"
#include "lagcn/theory.hpp"

#include "json.hpp"

namespace lagcn {

struct DatasetConfig {
    enum class Kind { synth, files };
    Kind kind = Kind::synth;
    SynthParams synth{};
    std::filesystem::path nodes;
    std::filesystem::path edges;
    LoadOptions load{};
};

struct ModelConfig {
    enum class Kind { sgc, gcn };
    Kind kind = Kind::sgc;
    int k = 2;
    FitConfig fit{};
};

struct SweepConfig {
    std::vector<double> p_minus_q{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<double> p_pre{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    /// Adding cap used by the p_pre sweep; 0 means refinement.n_max.
    std::size_t n_max = 0;
};

struct TheoryConfig {
    theory::SweepOptions sweep{};
};

/// Single serializable source of truth for every subcommand.
struct ExperimentConfig {
    std::string name = "lagcn";
    DatasetConfig dataset{};
    EdgeFeatureConfig edge_features{};
    TrainConfig edge_classifier{};
    RefinementConfig refinement{};
    ModelConfig model{};
    SweepConfig sweep{};
    std::size_t degrade_k = 5;
    TheoryConfig theory{};
    std::vector<std::uint64_t> seeds{0};
    std::filesystem::path output_dir = "lagcn-out";
    bool record_timing = false;
    /// Seeds evaluated concurrently. Output does not depend on it.
    std::size_t jobs = 1;

    void validate() const;
};

/// Parses a JSON document; unknown keys are rejected. Missing keys keep defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// FNV-1a of the canonical JSON dump (output_dir, timing and jobs excluded), hex.
std::string config_hash(const ExperimentConfig& cfg);

/// One CSV row. Undefined values print as NA.
struct MetricsRow {
    std::string experiment;
    std::string arm;
    std::string seed;
    std::optional<double> ratio_before;
    std::optional<double> ratio_after;
    std::optional<double> p;
    std::optional<double> q;
    std::optional<double> p_pre;
    std::optional<double> acc_train;
    std::optional<double> acc_val;
    std::optional<double> acc_test;
    std::optional<double> wall_ms;
    std::string flags;
};

struct MetricsRecord {
    std::string config_hash;
    std::vector<MetricsRow> rows; ///< per-seed rows followed by mean and std rows per arm
    std::vector<std::string> failed_arms;

    /// Rows for one arm; `summary` selects the "mean" / "std" rows.
    std::vector<const MetricsRow*> arm_rows(const std::string& arm) const;
    const MetricsRow* summary(const std::string& arm, const std::string& stat) const;
};

inline constexpr const char* kMetricsHeader =
    "experiment,arm,seed,ratio_before,ratio_after,p,q,p_pre,acc_train,acc_val,acc_test,wall_ms,config_hash,flags";

void write_metrics_csv(std::ostream& out, const MetricsRecord& record);

/// Loads or generates the dataset for one seed.
Dataset materialize_dataset(const ExperimentConfig& cfg, std::uint64_t seed);

/// origin vs LA arms (filter/add per cfg.refinement).
MetricsRecord run_pipeline(const ExperimentConfig& cfg);
/// origin, filter, add and filter+add arms with the trained classifier.
MetricsRecord run_ablation(const ExperimentConfig& cfg);
/// Same four arms with a perfect oracle scorer.
MetricsRecord run_oracle_ablation(const ExperimentConfig& cfg);

enum class SweepKind { p_minus_q, p_pre, both };
/// Oracle-classifier sweeps: filter-only over p − q (p = (1 + Δ)/2,
/// q = (1 − Δ)/2), add-only over p_pre.
MetricsRecord run_oracle_sweep(const ExperimentConfig& cfg, SweepKind kind);

/// Adds k different-label neighbors per node, then compares origin and LA
/// models on the degraded graph. k = 0 reproduces run_pipeline.
MetricsRecord run_degradation(const ExperimentConfig& cfg, std::size_t k);

/// Runs check_propositions on the standard grid and writes the sweep CSV.
theory::PropositionReport run_theory(const ExperimentConfig& cfg, std::ostream& sweep_csv);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Mean test accuracy per sweep grid value, in grid order.
std::vector<std::pair<double, double>> sweep_curve(const MetricsRecord& record, const std::string& prefix);

} // namespace lagcn
