#include "lagcn/theory.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <random>

#include "lagcn/error.hpp"
#include "lagcn/graph_io.hpp"
#include "lagcn/random.hpp"

namespace lagcn::theory {

namespace {

constexpr const char* kModule = "theory-sim";

double binomial_pmf(std::size_t n, std::size_t k, double p) {
    if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return k == n ? 1.0 : 0.0;
    const double log_choose = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
                              std::lgamma(static_cast<double>(n - k) + 1.0);
    return std::exp(log_choose + static_cast<double>(k) * std::log(p) +
                    static_cast<double>(n - k) * std::log1p(-p));
}

std::vector<double> unit_grid(int steps, bool include_zero) {
    std::vector<double> out;
    for (int i = include_zero ? 0 : 1; i <= steps; ++i) out.push_back(static_cast<double>(i) / steps);
    return out;
}

std::vector<std::size_t> count_grid(std::size_t lo, std::size_t hi) {
    std::vector<std::size_t> out;
    for (std::size_t i = lo; i <= hi; ++i) out.push_back(i);
    return out;
}

} // namespace

void GaussianMixtureParams::validate() const {
    if (!(sigma2 > 0.0)) fail(kModule, "sigma2 must be positive");
    if (!(mu_plus > mu_minus)) fail(kModule, "mu_plus must exceed mu_minus");
}

void NeighborhoodSpec::validate() const {
    if (n_plus + n_minus < 1) fail(kModule, "neighborhood is empty");
}

double NeighborhoodSpec::positive_ratio() const {
    validate();
    return static_cast<double>(n_plus) / static_cast<double>(n_plus + n_minus);
}

double e_origin(const NeighborhoodSpec& spec, const GaussianMixtureParams& gm) {
    const double r = spec.positive_ratio();
    return r * gm.mu_plus + (1.0 - r) * gm.mu_minus;
}

std::optional<double> e_filter(const NeighborhoodSpec& spec, const GaussianMixtureParams& gm, double p, double q) {
    spec.validate();
    const double np = p * static_cast<double>(spec.n_plus);
    const double nm = q * static_cast<double>(spec.n_minus);
    if (np + nm <= 0.0) return std::nullopt;
    return (np * gm.mu_plus + nm * gm.mu_minus) / (np + nm);
}

std::optional<double> e_filter_exact(const NeighborhoodSpec& spec, const GaussianMixtureParams& gm, double p,
                                     double q) {
    spec.validate();
    double mass = 0.0;
    double acc = 0.0;
    for (std::size_t a = 0; a <= spec.n_plus; ++a) {
        const double pa = binomial_pmf(spec.n_plus, a, p);
        if (pa == 0.0) continue;
        for (std::size_t b = 0; b <= spec.n_minus; ++b) {
            if (a + b == 0) continue;
            const double w = pa * binomial_pmf(spec.n_minus, b, q);
            if (w == 0.0) continue;
            mass += w;
            acc += w * (static_cast<double>(a) * gm.mu_plus + static_cast<double>(b) * gm.mu_minus) /
                   static_cast<double>(a + b);
        }
    }
    if (mass <= 0.0) return std::nullopt;
    return acc / mass;
}

double e_add(const NeighborhoodSpec& spec, const GaussianMixtureParams& gm, double p_pre) {
    spec.validate();
    const double np = static_cast<double>(spec.n_plus);
    const double nm = static_cast<double>(spec.n_minus);
    const double na = static_cast<double>(spec.n_added);
    if (spec.n_added == 0) return e_origin(spec, gm);
    return ((np + p_pre * na) * gm.mu_plus + (nm + (1.0 - p_pre) * na) * gm.mu_minus) / (np + nm + na);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

MonteCarloResult mc_aggregate(const NeighborhoodSpec& spec, const GaussianMixtureParams& gm, const SimMode& mode,
                              std::size_t trials, std::uint64_t seed) {
    spec.validate();
    gm.validate();
    if (trials < 1) fail(kModule, "trials must be >= 1");
    if (mode.mode == Mode::filter && !e_filter(spec, gm, mode.p, mode.q)) {
        fail(kModule, "filter mode keeps no neighbor with probability 1");
    }
    const double sigma = std::sqrt(gm.sigma2);
    MonteCarloResult res;
    res.trials = trials;
    double sum = 0.0;
    double sum_sq = 0.0;
    std::size_t below = 0;
    for (std::size_t i = 0; i < trials; ++i) {
        SplitMix64 rng(derive_seed(seed, i));
        std::normal_distribution<double> pos(gm.mu_plus, sigma);
        std::normal_distribution<double> neg(gm.mu_minus, sigma);
        double total = 0.0;
        std::size_t count = 0;
        switch (mode.mode) {
        case Mode::origin:
            for (std::size_t j = 0; j < spec.n_plus; ++j) total += pos(rng);
            for (std::size_t j = 0; j < spec.n_minus; ++j) total += neg(rng);
            count = spec.n_plus + spec.n_minus;
            break;
        case Mode::filter: {
            std::size_t keep_pos = 0;
            std::size_t keep_neg = 0;
            while (true) {
                keep_pos = 0;
                keep_neg = 0;
                for (std::size_t j = 0; j < spec.n_plus; ++j) keep_pos += rng.uniform() < mode.p ? 1 : 0;
                for (std::size_t j = 0; j < spec.n_minus; ++j) keep_neg += rng.uniform() < mode.q ? 1 : 0;
                if (keep_pos + keep_neg > 0) break;
                ++res.redraws;
            }
            for (std::size_t j = 0; j < keep_pos; ++j) total += pos(rng);
            for (std::size_t j = 0; j < keep_neg; ++j) total += neg(rng);
            count = keep_pos + keep_neg;
            break;
        }
        case Mode::add: {
            std::size_t added_pos = 0;
            for (std::size_t j = 0; j < spec.n_added; ++j) added_pos += rng.uniform() < mode.p_pre ? 1 : 0;
            for (std::size_t j = 0; j < spec.n_plus + added_pos; ++j) total += pos(rng);
            for (std::size_t j = 0; j < spec.n_minus + spec.n_added - added_pos; ++j) total += neg(rng);
            count = spec.n_plus + spec.n_minus + spec.n_added;
            break;
        }
        }
        const double f = total / static_cast<double>(count);
        sum += f;
        sum_sq += f * f;
        if (f < gm.tau) ++below;
    }
    const double n = static_cast<double>(trials);
    res.mean = sum / n;
    const double var = trials > 1 ? std::max(0.0, (sum_sq - n * res.mean * res.mean) / (n - 1.0)) : 0.0;
    res.std_error = std::sqrt(var / n);
    res.misclassification_rate = static_cast<double>(below) / n;
    res.misclassification_std_error = std::sqrt(res.misclassification_rate * (1.0 - res.misclassification_rate) / n);
    return res;
}

PropositionGrid PropositionGrid::standard() {
    PropositionGrid g;
    g.p_values = unit_grid(20, false);
    g.q_values = unit_grid(20, false);
    g.p_pre_values = unit_grid(20, true);
    g.n_plus_values = count_grid(1, 10);
    g.n_minus_values = count_grid(1, 10);
    g.n_added_values = count_grid(1, 10);
    g.mixtures = {GaussianMixtureParams{1.0, -1.0, 1.0, 0.0}};
    return g;
}

bool PropositionReport::ok(double boundary_tol) const {
    return filter_violations == 0 && filter_converse_violations == 0 && add_violations == 0 &&
           monotone_violations == 0 && bound_violations == 0 && filter_boundary_max_gap <= boundary_tol &&
           add_boundary_max_gap <= boundary_tol;
}

PropositionReport check_propositions(const PropositionGrid& grid) {
    const auto start = std::chrono::steady_clock::now();
    PropositionReport rep;
    constexpr std::size_t kMaxCounterexamples = 20;
    auto record = [&](Counterexample c) {
        if (rep.counterexamples.size() < kMaxCounterexamples) rep.counterexamples.push_back(std::move(c));
    };
    auto in_bounds = [](double v, const GaussianMixtureParams& gm) {
        return v >= gm.mu_minus - 1e-12 && v <= gm.mu_plus + 1e-12;
    };

    for (const auto& gm : grid.mixtures) {
        for (std::size_t np : grid.n_plus_values) {
            for (std::size_t nm : grid.n_minus_values) {
                const NeighborhoodSpec base{np, nm, 0};
                const double origin = e_origin(base, gm);
                const double r = base.positive_ratio();
                if (!in_bounds(origin, gm)) ++rep.bound_violations;

                for (std::size_t pi = 0; pi < grid.p_values.size(); ++pi) {
                    const double p = grid.p_values[pi];
                    for (std::size_t qi = 0; qi < grid.q_values.size(); ++qi) {
                        const double q = grid.q_values[qi];
                        const auto ef = e_filter(base, gm, p, q);
                        if (!ef) continue;
                        if (!in_bounds(*ef, gm)) ++rep.bound_violations;
                        Counterexample ce{"filter", np, nm, 0, p, q, 0.0, gm.mu_plus, gm.mu_minus, *ef, origin};
                        if (p > q) {
                            ++rep.filter_points;
                            if (!(*ef > origin)) {
                                ++rep.filter_violations;
                                record(ce);
                            }
                        } else if (p == q) {
                            ++rep.filter_boundary_points;
                            rep.filter_boundary_max_gap = std::max(rep.filter_boundary_max_gap, std::abs(*ef - origin));
                        } else {
                            ++rep.filter_converse_points;
                            if (!(*ef < origin)) {
                                ++rep.filter_converse_violations;
                                ce.proposition = "filter-converse";
                                record(ce);
                            }
                        }
                        // Strict monotonicity: increasing in p, decreasing in q.
                        if (pi + 1 < grid.p_values.size()) {
                            const auto next = e_filter(base, gm, grid.p_values[pi + 1], q);
                            if (next && q > 0.0 && !(*next > *ef)) ++rep.monotone_violations;
                        }
                        if (qi + 1 < grid.q_values.size()) {
                            const auto next = e_filter(base, gm, p, grid.q_values[qi + 1]);
                            if (next && p > 0.0 && !(*next < *ef)) ++rep.monotone_violations;
                        }
                    }
                }

                for (std::size_t na : grid.n_added_values) {
                    const NeighborhoodSpec spec{np, nm, na};
                    for (std::size_t ki = 0; ki < grid.p_pre_values.size(); ++ki) {
                        const double p_pre = grid.p_pre_values[ki];
                        const double ea = e_add(spec, gm, p_pre);
                        if (!in_bounds(ea, gm)) ++rep.bound_violations;
                        if (p_pre == r) {
                            ++rep.add_boundary_points;
                            rep.add_boundary_max_gap = std::max(rep.add_boundary_max_gap, std::abs(ea - origin));
                        } else {
                            ++rep.add_points;
                            if ((ea > origin) != (p_pre > r)) {
                                ++rep.add_violations;
                                record({"add", np, nm, na, 0.0, 0.0, p_pre, gm.mu_plus, gm.mu_minus, ea, origin});
                            }
                        }
                        if (ki + 1 < grid.p_pre_values.size() &&
                            !(e_add(spec, gm, grid.p_pre_values[ki + 1]) > ea)) {
                            ++rep.monotone_violations;
                        }
                    }
                }
            }
        }
    }
    rep.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

void write_theory_sweep_csv(std::ostream& out, const SweepOptions& opts, const std::string& config_hash) {
    const auto& gm = opts.mixture;
    gm.validate();
    out << "mode,n_plus,n_minus,n_added,p,q,p_pre,e_origin,analytic,analytic_exact,mc_mean,mc_std_error,"
           "mc_misclassification,config_hash\n";
    auto fmt = [](std::optional<double> v) { return v ? format_double(*v) : std::string("NA"); };
    std::uint64_t stream = 0;
    for (std::size_t np : opts.n_plus_values) {
        for (std::size_t nm : opts.n_minus_values) {
            const NeighborhoodSpec base{np, nm, 0};
            const double origin = e_origin(base, gm);
            {
                const auto mc = mc_aggregate(base, gm, SimMode::origin(), opts.trials, derive_seed(opts.seed, stream++));
                out << "origin," << np << ',' << nm << ",0,NA,NA,NA," << format_double(origin) << ','
                    << format_double(origin) << ',' << format_double(origin) << ',' << format_double(mc.mean) << ','
                    << format_double(mc.std_error) << ',' << format_double(mc.misclassification_rate) << ','
                    << config_hash << '\n';
            }
            for (double gap : opts.p_minus_q_values) {
                const double p = 0.5 + gap / 2.0;
                const double q = 0.5 - gap / 2.0;
                const auto mc =
                    mc_aggregate(base, gm, SimMode::filter(p, q), opts.trials, derive_seed(opts.seed, stream++));
                out << "filter," << np << ',' << nm << ",0," << format_double(p) << ',' << format_double(q) << ",NA,"
                    << format_double(origin) << ',' << fmt(e_filter(base, gm, p, q)) << ','
                    << fmt(e_filter_exact(base, gm, p, q)) << ',' << format_double(mc.mean) << ','
                    << format_double(mc.std_error) << ',' << format_double(mc.misclassification_rate) << ','
                    << config_hash << '\n';
            }
            const NeighborhoodSpec added{np, nm, opts.n_added};
            for (double p_pre : opts.p_pre_values) {
                const auto mc =
                    mc_aggregate(added, gm, SimMode::add(p_pre), opts.trials, derive_seed(opts.seed, stream++));
                const double ea = e_add(added, gm, p_pre);
                out << "add," << np << ',' << nm << ',' << opts.n_added << ",NA,NA," << format_double(p_pre) << ','
                    << format_double(origin) << ',' << format_double(ea) << ',' << format_double(ea) << ','
                    << format_double(mc.mean) << ',' << format_double(mc.std_error) << ','
                    << format_double(mc.misclassification_rate) << ',' << config_hash << '\n';
            }
        }
    }
}

} // namespace lagcn::theory
