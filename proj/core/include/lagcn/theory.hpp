#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lagcn::theory {

/// Node-level predictions follow N(mu_plus, sigma2) for same-label neighbors
/// and N(mu_minus, sigma2) otherwise; tau is the decision threshold.
struct GaussianMixtureParams {
    double mu_plus = 1.0;
    double mu_minus = -1.0;
    double sigma2 = 1.0;
    double tau = 0.0;

    void validate() const;
};

struct NeighborhoodSpec {
    std::size_t n_plus = 0;
    std::size_t n_minus = 0;
    std::size_t n_added = 0;

    void validate() const;
    double positive_ratio() const;
};

/// r·μ⁺ + (1 − r)·μ⁻ with r = n⁺ / (n⁺ + n⁻).
double e_origin(const NeighborhoodSpec& spec, const GaussianMixtureParams& gm);

/// (p·n⁺·μ⁺ + q·n⁻·μ⁻) / (p·n⁺ + q·n⁻); nullopt when the denominator is 0.
std::optional<double> e_filter(const NeighborhoodSpec& spec, const GaussianMixtureParams& gm, double p, double q);

/// Exact E[mean of surviving predictions | at least one survivor] when each
/// positive survives w.p. p and each negative w.p. q, independently.
std::optional<double> e_filter_exact(const NeighborhoodSpec& spec, const GaussianMixtureParams& gm, double p,
                                     double q);

/// ((n⁺ + p_pre·n')μ⁺ + (n⁻ + (1 − p_pre)·n')μ⁻) / (n⁺ + n⁻ + n').
double e_add(const NeighborhoodSpec& spec, const GaussianMixtureParams& gm, double p_pre);

/// Standard normal CDF.
double normal_cdf(double x);

enum class Mode { origin, filter, add };

struct SimMode {
    Mode mode = Mode::origin;
    double p = 1.0;
    double q = 0.0;
    double p_pre = 1.0;

    static SimMode origin() { return {}; }
    static SimMode filter(double p, double q) { return {Mode::filter, p, q, 1.0}; }
    static SimMode add(double p_pre) { return {Mode::add, 1.0, 0.0, p_pre}; }
};

struct MonteCarloResult {
    double mean = 0.0;
    double std_error = 0.0;
    double misclassification_rate = 0.0; ///< P(F < τ) for a positive-class node
    double misclassification_std_error = 0.0;
    std::size_t trials = 0;
    std::size_t redraws = 0; ///< filter mode: trials whose neighborhood emptied and was redrawn
};

/// Simulates the aggregated prediction F(h_v) = mean of the selected
/// neighbors' predictions. Trial i draws from its own stream keyed by
/// (seed, i), so results do not depend on how trials are partitioned.
MonteCarloResult mc_aggregate(const NeighborhoodSpec& spec, const GaussianMixtureParams& gm, const SimMode& mode,
                              std::size_t trials, std::uint64_t seed);

struct PropositionGrid {
    std::vector<double> p_values;
    std::vector<double> q_values;
    std::vector<double> p_pre_values;
    std::vector<std::size_t> n_plus_values;
    std::vector<std::size_t> n_minus_values;
    std::vector<std::size_t> n_added_values;
    std::vector<GaussianMixtureParams> mixtures;

    /// p, q, p_pre ∈ {0, 0.05, …, 1}, n⁺, n⁻, n' ∈ {1..10}, μ⁺ = 1, μ⁻ = −1.
    static PropositionGrid standard();
};

struct Counterexample {
    std::string proposition;
    std::size_t n_plus, n_minus, n_added;
    double p, q, p_pre, mu_plus, mu_minus;
    double lhs, rhs;
};

struct PropositionReport {
    std::size_t filter_points = 0;       ///< points with p > q
    std::size_t filter_violations = 0;   ///< e_filter <= e_origin there
    std::size_t filter_boundary_points = 0;
    double filter_boundary_max_gap = 0.0; ///< max |e_filter − e_origin| at p = q
    std::size_t filter_converse_points = 0;      ///< points with p < q
    std::size_t filter_converse_violations = 0;  ///< e_filter >= e_origin there

    std::size_t add_points = 0;
    std::size_t add_violations = 0;       ///< (e_add > e_origin) != (p_pre > r), off the boundary
    std::size_t add_boundary_points = 0;  ///< p_pre == r exactly
    double add_boundary_max_gap = 0.0;

    std::size_t monotone_violations = 0;  ///< grid-differencing failures of the monotonicity properties
    std::size_t bound_violations = 0;     ///< analytic values outside [μ⁻, μ⁺]
    std::vector<Counterexample> counterexamples;
    double elapsed_ms = 0.0;

    bool ok(double boundary_tol = 1e-12) const;
};

/// Exhaustively evaluates the filter and add propositions over the grid.
PropositionReport check_propositions(const PropositionGrid& grid);

/// CSV sweep: one row per grid point with analytic and Monte Carlo columns.
struct SweepOptions {
    std::size_t trials = 20000;
    std::uint64_t seed = 0;
    GaussianMixtureParams mixture{};
    std::vector<std::size_t> n_plus_values{1, 3, 6};
    std::vector<std::size_t> n_minus_values{1, 3, 6};
    std::vector<double> p_minus_q_values{0.0, 0.2, 0.4, 0.6, 0.8};
    std::vector<double> p_pre_values{0.0, 0.25, 0.5, 0.75, 1.0};
    std::size_t n_added = 4;
};

void write_theory_sweep_csv(std::ostream& out, const SweepOptions& opts, const std::string& config_hash);

} // namespace lagcn::theory
