#include <gtest/gtest.h>

#include <sstream>

#include "lagcn/error.hpp"
#include "lagcn/experiment.hpp"

namespace lagcn {
namespace {

using nlohmann::json;

ExperimentConfig small_config() {
    return config_from_json(json::parse(R"({
        "dataset": {"type": "synth", "num_nodes": 240, "homophily": 0.4, "feature_sep": 3.0},
        "edge_features": {"raw": true},
        "edge_classifier": {"learning_rate": 0.03, "epochs": 30, "proj_dim": 8, "hidden_widths": [8],
                            "sampled_pairs": 200},
        "model": {"epochs": 60},
        "sweep": {"p_minus_q": [0.0, 1.0], "p_pre": [0.0, 1.0]},
        "seeds": [0, 1]
    })"));
}

std::string csv(const MetricsRecord& r) {
    std::ostringstream out;
    write_metrics_csv(out, r);
    return out.str();
}

TEST(Config, DefaultsAndOverrides) {
    const ExperimentConfig cfg = small_config();
    EXPECT_EQ(cfg.dataset.synth.num_nodes, 240u);
    EXPECT_EQ(cfg.edge_classifier.sampled_pairs, 200u);
    EXPECT_EQ(cfg.refinement.n_max, RefinementConfig{}.n_max);
    EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{0, 1}));
}

TEST(Config, JsonRoundTripKeepsHash) {
    const ExperimentConfig cfg = small_config();
    const ExperimentConfig back = config_from_json(config_to_json(cfg));
    EXPECT_EQ(config_hash(back), config_hash(cfg));
    EXPECT_EQ(config_to_json(back), config_to_json(cfg));
}

TEST(Config, HashIgnoresOutputDirOnly) {
    ExperimentConfig a = small_config();
    ExperimentConfig b = a;
    b.output_dir = "/elsewhere";
    b.record_timing = true;
    EXPECT_EQ(config_hash(a), config_hash(b));
    b.refinement.n_max = 9;
    EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, Rejections) {
    EXPECT_THROW(config_from_json(json::parse(R"({"sedes": [1]})")), Error);
    EXPECT_THROW(config_from_json(json::parse(R"({"model": {"kind": "sgc"}})")), Error);
    EXPECT_THROW(config_from_json(json::parse(R"({"seeds": []})")), Error);
    EXPECT_THROW(config_from_json(json::parse(R"({"dataset": {"type": "files"}})")), Error);
    EXPECT_THROW(config_from_json(json::parse(R"({"model": {"epochs": "many"}})")), Error);
    EXPECT_THROW(config_from_json(json::parse(R"({"refinement": {"threshold": 2}})")), Error);
}

TEST(Metrics, HeaderAndHashColumn) {
    const ExperimentConfig cfg = small_config();
    const MetricsRecord r = run_pipeline(cfg);
    const std::string text = csv(r);
    EXPECT_EQ(text.substr(0, text.find('\n')), kMetricsHeader);
    EXPECT_TRUE(r.failed_arms.empty());
    // 2 arms x (2 seeds + mean + std)
    EXPECT_EQ(r.rows.size(), 8u);
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) EXPECT_NE(line.find("," + r.config_hash + ","), std::string::npos);
    const MetricsRow* la = r.summary("la", "mean");
    ASSERT_NE(la, nullptr);
    EXPECT_TRUE(la->p && la->q && la->ratio_after);
    EXPECT_FALSE(la->wall_ms);
}

TEST(Metrics, RerunIsByteIdentical) {
    const ExperimentConfig cfg = small_config();
    EXPECT_EQ(csv(run_pipeline(cfg)), csv(run_pipeline(cfg)));
    EXPECT_EQ(csv(run_oracle_sweep(cfg, SweepKind::both)), csv(run_oracle_sweep(cfg, SweepKind::both)));
}

TEST(Ablation, FourArmsPerSeedAndOriginMatchesPipeline) {
    const ExperimentConfig cfg = small_config();
    const MetricsRecord ab = run_ablation(cfg);
    const MetricsRecord pipe = run_pipeline(cfg);
    for (std::uint64_t seed : cfg.seeds) {
        std::size_t arms = 0;
        for (const auto& row : ab.rows) arms += row.seed == std::to_string(seed);
        EXPECT_EQ(arms, 4u);
    }
    const auto a = ab.arm_rows("origin");
    const auto b = pipe.arm_rows("origin");
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i]->acc_test, b[i]->acc_test);
        EXPECT_EQ(a[i]->ratio_before, b[i]->ratio_before);
    }
}

TEST(Sweep, PerfectEndpointMatchesOracleFilterArm) {
    const ExperimentConfig cfg = small_config();
    const MetricsRecord sweep = run_oracle_sweep(cfg, SweepKind::p_minus_q);
    const MetricsRecord oracle = run_oracle_ablation(cfg);
    const auto a = sweep.arm_rows("p_minus_q=1.00");
    const auto b = oracle.arm_rows("filter");
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i]->acc_test, b[i]->acc_test);
        EXPECT_EQ(a[i]->ratio_after, b[i]->ratio_after);
        EXPECT_EQ(*a[i]->ratio_after, 1.0);
    }
    const auto curve = sweep_curve(sweep, "p_minus_q");
    ASSERT_EQ(curve.size(), 2u);
    EXPECT_EQ(curve[0].first, 0.0);
    EXPECT_EQ(curve[1].first, 1.0);
}

TEST(Sweep, AchievedPrecisionReported) {
    const ExperimentConfig cfg = small_config();
    const MetricsRecord r = run_oracle_sweep(cfg, SweepKind::p_pre);
    for (const auto* row : r.arm_rows("p_pre=1.00")) EXPECT_EQ(*row->p_pre, 1.0);
    for (const auto* row : r.arm_rows("p_pre=0.00")) EXPECT_EQ(*row->p_pre, 0.0);
}

TEST(Degrade, ZeroMatchesPipelineRows) {
    const ExperimentConfig cfg = small_config();
    const MetricsRecord pipe = run_pipeline(cfg);
    const MetricsRecord deg = run_degradation(cfg, 0);
    ASSERT_EQ(pipe.rows.size(), deg.rows.size());
    for (std::size_t i = 0; i < pipe.rows.size(); ++i) {
        const auto& a = pipe.rows[i];
        const auto& b = deg.rows[i];
        EXPECT_EQ(a.arm, b.arm);
        EXPECT_EQ(a.seed, b.seed);
        EXPECT_EQ(a.acc_test, b.acc_test);
        EXPECT_EQ(a.ratio_after, b.ratio_after);
        EXPECT_EQ(a.p, b.p);
    }
}

TEST(Degrade, LowersRatio) {
    const ExperimentConfig cfg = small_config();
    const MetricsRecord r = run_degradation(cfg, 3);
    EXPECT_LT(*r.summary("origin", "mean")->ratio_before, *r.summary("clean-origin", "mean")->ratio_before);
}

TEST(Failures, FailedArmsAreEnumerated) {
    ExperimentConfig cfg = small_config();
    cfg.dataset.synth.num_classes = 1;
    cfg.dataset.synth.homophily = 1.0;
    cfg.edge_classifier.sampled_pairs = 0;
    const MetricsRecord r = run_pipeline(cfg);
    ASSERT_EQ(r.failed_arms.size(), 2u);
    EXPECT_NE(r.failed_arms[0].find("la@seed0"), std::string::npos);
    EXPECT_NE(r.failed_arms[0].find("edge-classifier"), std::string::npos);
    EXPECT_EQ(r.arm_rows("origin").size(), 2u);
}

TEST(Spearman, Ranks) {
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {10, 20, 25, 100}), 1.0);
    EXPECT_DOUBLE_EQ(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0);
    // Ties get average ranks: y ranks (1.5, 1.5, 3) against x ranks (1, 2, 3).
    EXPECT_NEAR(spearman({1, 2, 3}, {5, 5, 7}), 0.8660254037844386, 1e-12);
    EXPECT_THROW(spearman({1}, {1}), Error);
}

} // namespace
} // namespace lagcn
