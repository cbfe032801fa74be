// SPDX-License-Identifier: Apache-2.0
#ifndef SBISECT_EXPERIMENTS_HPP
#define SBISECT_EXPERIMENTS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sbisect/distributions.hpp"
#include "sbisect/engine.hpp"
#include "sbisect/errors.hpp"
#include "sbisect/operator.hpp"
#include "sbisect/random.hpp"
#include "sbisect/report.hpp"
#include "sbisect/stats.hpp"
#include "sbisect/theory.hpp"

namespace sbisect::experiments {

inline constexpr std::uint64_t kDefaultSeed = 2024;
// Tolerance small enough that a run is bounded by its iteration cap only.
inline constexpr double kNoTolerance = std::numeric_limits<double>::min();

struct Common {
  std::uint64_t seed = kDefaultSeed;
  double level = 0.95;
  std::size_t resamples = kDefaultResamples;
};

namespace detail {

inline std::string num(double v) { return Distribution::format_number(v); }

inline void echo_common(ExperimentReport& report, const Common& common) {
  report.set_config("seed", std::to_string(common.seed));
  report.set_config("level", num(common.level));
  report.set_config("resamples", std::to_string(common.resamples));
}

inline void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

inline void check_common(const Common& common) {
  require(common.level > 0.0 && common.level < 1.0, "--level must lie in (0,1)");
  require(common.resamples >= 1, "--resamples must be at least 1");
}

inline IntervalEstimate bootstrap(const std::vector<double>& xs, const Common& common, const char* tag) {
  auto rng = RandomStream::derive(common.seed, tag, 0);
  return bootstrap_mean_ci(xs, common.level, common.resamples, rng);
}

/// Maps a CI for E[L_N] to one for E[L_N]^(1/N); the map is increasing.
inline IntervalEstimate nth_root(IntervalEstimate ci, std::size_t n) {
  const double inv = 1.0 / static_cast<double>(n);
  ci.point = std::pow(ci.point, inv);
  ci.lower = std::pow(ci.lower, inv);
  ci.upper = std::pow(ci.upper, inv);
  return ci;
}

/// Number of halvings of [0,1] before the length drops below tol.
inline std::size_t deterministic_iterations(double tol) {
  std::size_t n = 0;
  for (double len = 1.0; len >= tol; len *= 0.5) ++n;
  return n;
}

}  // namespace detail

// ------------------------------------------------------------ contraction

struct ContractionConfig {
  std::string cut_spec = "uniform";
  std::size_t runs = 500;
  std::size_t iters = 30;
  double tol = 1e-15;
  Common common;
};

/// Mean scaling factor for one cut law: uniform root, f(x) = x - r on [0,1], interval bisection.
inline ExperimentReport run_contraction_experiment(const ContractionConfig& cfg) {
  detail::check_common(cfg.common);
  detail::require(cfg.runs >= 2, "--runs must be at least 2");
  detail::require(cfg.iters >= 1, "--iters must be at least 1");
  detail::require(cfg.tol > 0.0, "--tol must be positive");
  const Distribution cut = parse_distribution(cfg.cut_spec);
  const Distribution root_law = Distribution::uniform();

  std::vector<double> ells;
  ells.reserve(cfg.runs * cfg.iters);
  std::vector<double> final_lengths;
  final_lengths.reserve(cfg.runs);
  std::size_t early = 0;
  for (std::size_t run = 0; run < cfg.runs; ++run) {
    auto rng = RandomStream::derive(cfg.common.seed, "contraction", run);
    const double r = draw_interior_cut(root_law, rng);
    const auto trace = bisection_run([r](double x) { return x - r; }, 0.0, 1.0, cut, cfg.tol, cfg.iters, rng, r);
    for (const auto& rec : trace.iterations) ells.push_back(rec.ell);
    final_lengths.push_back(trace.final_L());
    if (trace.iteration_count() < cfg.iters) ++early;
  }

  ExperimentReport report;
  report.experiment = "contraction";
  report.set_config("dist", cut.spec());
  report.set_config("runs", std::to_string(cfg.runs));
  report.set_config("iters", std::to_string(cfg.iters));
  report.set_config("tol", detail::num(cfg.tol));
  detail::echo_common(report, cfg.common);

  const double theory = expected_contraction(cut);
  report.add_estimate("mean_ell", detail::bootstrap(ells, cfg.common, "bootstrap:mean_ell"), theory);
  report.add_estimate("geometric_mean_L",
                      detail::nth_root(detail::bootstrap(final_lengths, cfg.common, "bootstrap:mean_L"), cfg.iters),
                      theory);
  report.add_scalar("ell_variance", sample_variance(ells), contraction_variance(cut));
  report.add_scalar("early_terminations", static_cast<double>(early));
  return report;
}

// --------------------------------------------------------------- ksection

struct KsectionConfig {
  std::size_t K = 2;
  std::size_t runs = 500;
  std::size_t iters = 30;
  Common common;
};

/// Mean scaling factor with K uniform cuts per step, uniform root.
inline ExperimentReport run_ksection_experiment(const KsectionConfig& cfg) {
  detail::check_common(cfg.common);
  detail::require(cfg.K >= 1, "--K must be at least 1");
  detail::require(cfg.runs >= 2, "--runs must be at least 2");
  detail::require(cfg.iters >= 1, "--iters must be at least 1");
  const Distribution uniform = Distribution::uniform();

  std::vector<double> ells;
  ells.reserve(cfg.runs * cfg.iters);
  std::vector<double> final_lengths;
  final_lengths.reserve(cfg.runs);
  for (std::size_t run = 0; run < cfg.runs; ++run) {
    auto rng = RandomStream::derive(cfg.common.seed, "ksection", run);
    double r = draw_interior_cut(uniform, rng);
    double length = 1.0;
    for (std::size_t i = 0; i < cfg.iters; ++i) {
      const auto [ell, next] = multisection_step(r, cfg.K, rng);
      ells.push_back(ell);
      length *= ell;
      r = next;
    }
    final_lengths.push_back(length);
  }

  ExperimentReport report;
  report.experiment = "ksection";
  report.set_config("K", std::to_string(cfg.K));
  report.set_config("runs", std::to_string(cfg.runs));
  report.set_config("iters", std::to_string(cfg.iters));
  detail::echo_common(report, cfg.common);

  const double theory = ksection_expected(cfg.K);
  report.add_estimate("mean_ell", detail::bootstrap(ells, cfg.common, "bootstrap:mean_ell"), theory);
  report.add_estimate("geometric_mean_L",
                      detail::nth_root(detail::bootstrap(final_lengths, cfg.common, "bootstrap:mean_L"), cfg.iters),
                      theory);
  return report;
}

// ------------------------------------------------------------- fixed root

struct FixedRootConfig {
  double root = 0.1;
  std::string cut_spec = "bates:20";
  double tol = 1e-8;
  std::size_t runs = 1000;
  std::size_t max_iter = 100000;
  Common common;
};

/// One run of the fixed-root experiment, reproducible from its index.
inline RunTrace fixed_root_trace(const FixedRootConfig& cfg, const Distribution& cut, std::size_t run) {
  auto rng = RandomStream::derive(cfg.common.seed, "fixed-root", run);
  const double r = cfg.root;
  return bisection_run([r](double x) { return x - r; }, 0.0, 1.0, cut, cfg.tol, cfg.max_iter, rng, r);
}

inline RunTrace fixed_root_trace(const FixedRootConfig& cfg, std::size_t run) {
  return fixed_root_trace(cfg, parse_distribution(cfg.cut_spec), run);
}

/// Iterations to reach tol for a fixed root, and the share
/// of runs no slower than deterministic bisection.
inline ExperimentReport run_fixed_root_experiment(const FixedRootConfig& cfg) {
  detail::check_common(cfg.common);
  detail::require(cfg.root > 0.0 && cfg.root < 1.0, "--root must lie in (0,1)");
  detail::require(cfg.runs >= 2, "--runs must be at least 2");
  detail::require(cfg.tol > 0.0 && cfg.tol < 1.0, "--tol must lie in (0,1)");
  detail::require(cfg.max_iter >= 1, "--iters must be at least 1");
  const Distribution cut = parse_distribution(cfg.cut_spec);
  const std::size_t baseline = detail::deterministic_iterations(cfg.tol);

  std::vector<double> counts;
  counts.reserve(cfg.runs);
  std::size_t lucky = 0;
  std::size_t capped = 0;
  for (std::size_t run = 0; run < cfg.runs; ++run) {
    const auto trace = fixed_root_trace(cfg, cut, run);
    counts.push_back(static_cast<double>(trace.iteration_count()));
    if (trace.iteration_count() <= baseline) ++lucky;
    if (trace.terminated_by == Termination::MaxIterations) ++capped;
  }

  ExperimentReport report;
  report.experiment = "fixed-root";
  report.set_config("root", detail::num(cfg.root));
  report.set_config("dist", cut.spec());
  report.set_config("tol", detail::num(cfg.tol));
  report.set_config("runs", std::to_string(cfg.runs));
  report.set_config("max_iter", std::to_string(cfg.max_iter));
  detail::echo_common(report, cfg.common);

  report.add_estimate("mean_iterations", detail::bootstrap(counts, cfg.common, "bootstrap:iterations"));
  report.add_scalar("min_iterations", *std::min_element(counts.begin(), counts.end()));
  report.add_scalar("max_iterations", *std::max_element(counts.begin(), counts.end()));
  report.add_scalar("deterministic_iterations", static_cast<double>(baseline));
  report.add_estimate("lucky_fraction", wilson_ci(lucky, cfg.runs, cfg.common.level));
  report.add_scalar("capped_runs", static_cast<double>(capped));
  return report;
}

// ----------------------------------------------------------- stationarity

struct StationarityConfig {
  std::string root_spec = "uniform";
  std::string cut_spec = "uniform";
  std::size_t runs = 1000;
  std::size_t iters = 40;
  double alpha = 0.01;
  Common common;
};

/// Rescaled roots r_1..r_iters for each run; rows indexed by iteration.
inline std::vector<std::vector<double>> rescaled_root_paths(const Distribution& root_law, const Distribution& cut,
                                                            std::size_t runs, std::size_t iters, std::uint64_t seed,
                                                            const char* tag) {
  std::vector<std::vector<double>> by_iteration(iters, std::vector<double>(runs));
  for (std::size_t run = 0; run < runs; ++run) {
    auto rng = RandomStream::derive(seed, tag, run);
    const double r0 = draw_interior_cut(root_law, rng);
    const auto trace = rescaled_run(r0, cut, kNoTolerance, iters, rng);
    for (std::size_t n = 0; n < iters; ++n) by_iteration[n][run] = trace.iterations[n].r_normalized;
  }
  return by_iteration;
}

/// Empirical law of the rescaled root after `iters` steps, tested against
/// the uniform law.
inline ExperimentReport run_stationarity_experiment(const StationarityConfig& cfg) {
  detail::check_common(cfg.common);
  detail::require(cfg.runs >= 2, "--runs must be at least 2");
  detail::require(cfg.iters >= 1, "--iters must be at least 1");
  detail::require(cfg.alpha > 0.0 && cfg.alpha < 1.0, "--alpha must lie in (0,1)");
  const Distribution root_law = parse_distribution(cfg.root_spec);
  const Distribution cut = parse_distribution(cfg.cut_spec);
  if (cut.is_endpoint_atom()) throw EndpointAtomError("cut law " + cut.spec() + " only cuts at the endpoints");

  const auto paths = rescaled_root_paths(root_law, cut, cfg.runs, cfg.iters, cfg.common.seed, "stationarity");
  const double critical = ks_critical_value(cfg.alpha, cfg.runs);

  ExperimentReport report;
  report.experiment = "stationarity";
  report.set_config("root_dist", root_law.spec());
  report.set_config("dist", cut.spec());
  report.set_config("runs", std::to_string(cfg.runs));
  report.set_config("iters", std::to_string(cfg.iters));
  report.set_config("alpha", detail::num(cfg.alpha));
  detail::echo_common(report, cfg.common);

  ReportTable by_n{"ks_by_iteration", {"n", "ks", "critical"}, {}};
  bool all_pass = true;
  for (std::size_t n = 0; n < cfg.iters; ++n) {
    const double d = ks_statistic(paths[n]);
    all_pass = all_pass && d < critical;
    by_n.rows.push_back({static_cast<double>(n + 1), d, critical});
  }
  const auto& final_roots = paths.back();
  const double ks = ks_statistic(final_roots);
  const auto at_endpoint = static_cast<std::size_t>(
      std::count_if(final_roots.begin(), final_roots.end(), [](double r) { return r == 0.0 || r == 1.0; }));

  report.add_scalar("ks_statistic", ks);
  report.add_scalar("ks_critical", critical);
  report.add_scalar("endpoint_fraction", static_cast<double>(at_endpoint) / static_cast<double>(cfg.runs));
  report.add_flag("ks_pass", ks < critical);
  report.add_flag("ks_pass_all_iterations", all_pass);
  report.add_flag("degenerate_orbit", at_endpoint == cfg.runs);

  ReportTable qq{"qq", {"theoretical", "sample"}, {}};
  for (const auto& [t, s] : qq_points(final_roots)) qq.rows.push_back({t, s});
  report.tables.push_back(std::move(qq));
  report.tables.push_back(std::move(by_n));
  return report;
}

// ------------------------------------------------------------------ decay

/// How the decay series is fitted. `signal` is the log-linear fit over the
/// leading points that stay above the sampling-noise threshold; `loglinear`
/// uses every point; `nls` is least squares in the original scale.
enum class DecayFit { Signal, LogLinear, Nonlinear };

inline std::string to_string(DecayFit f) {
  switch (f) {
    case DecayFit::LogLinear:
      return "loglinear";
    case DecayFit::Nonlinear:
      return "nls";
    default:
      return "signal";
  }
}

inline DecayFit parse_decay_fit(const std::string& s) {
  if (s == "signal") return DecayFit::Signal;
  if (s == "loglinear") return DecayFit::LogLinear;
  if (s == "nls") return DecayFit::Nonlinear;
  throw ParseError("unknown fit method '" + s + "' (expected signal, loglinear or nls)");
}

/// Multiple of the per-sample noise scale (1/sqrt(M) for the KS distance,
/// sd(ell)/sqrt(M) for the mean) below which a series value is treated as noise.
inline constexpr double kSignalThreshold = 3.0;

struct SeriesFit {
  ExponentialFit fit;
  std::size_t points = 0;
};

/// Fits values[0..] with the chosen method. For `signal`, the series is cut
/// at the first value below `noise_floor`; fewer than two leading points
/// fall back to the full series.
inline SeriesFit fit_series(const std::vector<double>& values, DecayFit method, double noise_floor) {
  if (method == DecayFit::Nonlinear) return {fit_exponential_decay_nls(values), values.size()};
  if (method == DecayFit::Signal) {
    std::size_t n = 0;
    while (n < values.size() && values[n] >= noise_floor) ++n;
    if (n >= 2) return {fit_exponential_decay(std::span<const double>(values.data(), n)), n};
  }
  return {fit_exponential_decay(values), values.size()};
}

struct DecayConfig {
  std::string root_spec = "beta:0.1,2";
  std::string cut_spec = "uniform";
  std::size_t population = 10000;
  std::size_t iters = 50;
  DecayFit fit = DecayFit::Signal;
  Common common;
};

/// Kolmogorov-Smirnov distance of the rescaled roots to the uniform law
/// per iteration, with an exponential fit of its decay, and the same for
/// the distance of the mean scaling factor to its limit.
inline ExperimentReport run_decay_experiment(const DecayConfig& cfg) {
  detail::check_common(cfg.common);
  detail::require(cfg.population >= 100, "--runs (population) must be at least 100");
  detail::require(cfg.iters >= 2, "--iters must be at least 2");
  const Distribution root_law = parse_distribution(cfg.root_spec);
  const Distribution cut = parse_distribution(cfg.cut_spec);
  if (cut.is_endpoint_atom()) throw EndpointAtomError("cut law " + cut.spec() + " only cuts at the endpoints");

  const std::size_t m = cfg.population;
  std::vector<double> initial(m);
  std::vector<std::vector<double>> roots(cfg.iters, std::vector<double>(m));
  std::vector<double> ell_sums(cfg.iters, 0.0);
  for (std::size_t p = 0; p < m; ++p) {
    auto rng = RandomStream::derive(cfg.common.seed, "decay", p);
    double r = draw_interior_cut(root_law, rng);
    initial[p] = r;
    for (std::size_t n = 0; n < cfg.iters; ++n) {
      const auto [ell, next] = rescaled_step(r, draw_interior_cut(cut, rng));
      ell_sums[n] += ell;
      r = next;
      roots[n][p] = r;
    }
  }

  const double limit = expected_contraction(cut);
  std::vector<double> ks{ks_statistic(initial)};
  ReportTable ks_table{"ks", {"n", "ks"}, {{0.0, ks.front()}}};
  std::vector<double> deviation;
  ReportTable mean_table{"mean_ell", {"n", "mean_ell", "deviation"}, {}};
  for (std::size_t n = 0; n < cfg.iters; ++n) {
    ks.push_back(ks_statistic(roots[n]));
    ks_table.rows.push_back({static_cast<double>(n + 1), ks.back()});
    const double mean_ell = ell_sums[n] / static_cast<double>(m);
    deviation.push_back(std::fabs(mean_ell - limit));
    mean_table.rows.push_back({static_cast<double>(n + 1), mean_ell, deviation.back()});
  }

  ExperimentReport report;
  report.experiment = "decay";
  report.set_config("root_dist", root_law.spec());
  report.set_config("dist", cut.spec());
  report.set_config("population", std::to_string(m));
  report.set_config("iters", std::to_string(cfg.iters));
  report.set_config("fit", to_string(cfg.fit));
  detail::echo_common(report, cfg.common);

  const double sqrt_m = std::sqrt(static_cast<double>(m));
  const double ks_floor = kSignalThreshold / sqrt_m;
  const double mean_floor = kSignalThreshold * std::sqrt(contraction_variance(cut)) / sqrt_m;
  const auto ks_fit = fit_series(ks, cfg.fit, ks_floor);
  const double root_rate = expected_contraction(root_law);
  report.add_scalar("ks_rho", ks_fit.fit.rho);
  report.add_scalar("ks_rate", ks_fit.fit.rate, root_rate);
  report.add_scalar("ks_fit_points", static_cast<double>(ks_fit.points));
  report.add_scalar("ks_noise_floor", ks_floor);
  report.add_scalar("theoretical_rate_root_law", root_rate);
  report.add_scalar("theoretical_rate_cut_law", limit);
  report.add_flag("no_signal", ks_fit.fit.rho < 2.0 / static_cast<double>(cfg.iters));

  const bool positive = std::all_of(deviation.begin(), deviation.end(), [](double d) { return d > 0.0; });
  if (positive) {
    const auto mean_fit = fit_series(deviation, cfg.fit, mean_floor);
    report.add_scalar("mean_rho", mean_fit.fit.rho);
    report.add_scalar("mean_rate", mean_fit.fit.rate, root_rate);
    report.add_scalar("mean_fit_points", static_cast<double>(mean_fit.points));
  }
  report.add_flag("mean_fit_available", positive);
  report.tables.push_back(std::move(ks_table));
  report.tables.push_back(std::move(mean_table));
  return report;
}

// ------------------------------------------------------------ correlation

struct CorrelationConfig {
  std::string root_spec = "beta:5,50";
  std::string cut_spec = "beta:5,50";
  std::size_t runs = 10000;
  std::size_t iters = 14;
  Common common;
};

/// Correlation matrix of (ell_1, ..., ell_iters) across runs.
inline ExperimentReport run_correlation_experiment(const CorrelationConfig& cfg) {
  detail::check_common(cfg.common);
  detail::require(cfg.runs >= 2, "--runs must be at least 2");
  detail::require(cfg.iters >= 2, "--iters must be at least 2");
  const Distribution root_law = parse_distribution(cfg.root_spec);
  const Distribution cut = parse_distribution(cfg.cut_spec);

  std::vector<std::vector<double>> columns(cfg.iters, std::vector<double>(cfg.runs));
  for (std::size_t run = 0; run < cfg.runs; ++run) {
    auto rng = RandomStream::derive(cfg.common.seed, "correlation", run);
    const double r0 = draw_interior_cut(root_law, rng);
    const auto trace = rescaled_run(r0, cut, kNoTolerance, cfg.iters, rng);
    for (std::size_t i = 0; i < cfg.iters; ++i) columns[i][run] = trace.iterations[i].ell;
  }
  const auto corr = correlation_matrix(columns);

  ExperimentReport report;
  report.experiment = "correlation";
  report.set_config("root_dist", root_law.spec());
  report.set_config("dist", cut.spec());
  report.set_config("runs", std::to_string(cfg.runs));
  report.set_config("iters", std::to_string(cfg.iters));
  detail::echo_common(report, cfg.common);

  double max_off = 0.0;
  for (std::size_t a = 0; a < cfg.iters; ++a) {
    for (std::size_t b = a + 1; b < cfg.iters; ++b) max_off = std::max(max_off, std::fabs(corr[a][b]));
  }
  const double threshold = 4.0 / std::sqrt(static_cast<double>(cfg.runs));
  report.add_scalar("corr_ell1_ell2", corr[0][1]);
  report.add_scalar("max_abs_offdiagonal", max_off);
  report.add_scalar("independence_threshold", threshold);
  report.add_flag("uncorrelated", max_off < threshold);

  ReportTable table{"correlation", {}, corr};
  for (std::size_t i = 0; i < cfg.iters; ++i) table.columns.push_back("ell_" + std::to_string(i + 1));
  report.tables.push_back(std::move(table));
  return report;
}

// --------------------------------------------------------------- operator

struct OperatorConfig {
  std::string g0_spec = "cubic";
  std::string cut_spec = "uniform";
  std::size_t k = 30;
  std::size_t grid = kDefaultGridSize;
  double delta = 0.25;
  std::size_t ell_points = 257;
  Common common;
};

/// Initial root CDF from a spec: `cubic` is t(4t^2 - 6t + 3), `identity`
/// is the uniform law, anything else is a distribution spec.
inline GridCdf initial_cdf(const std::string& spec, std::size_t grid) {
  if (spec == "cubic") return GridCdf::from_function(grid, [](double t) { return t * (4.0 * t * t - 6.0 * t + 3.0); });
  if (spec == "identity") return GridCdf::identity(grid);
  return GridCdf::from_distribution(parse_distribution(spec), grid);
}

/// sup over an evenly spaced t-grid of |H_g(t) - H(t)|.
inline double ell_cdf_distance(const GridCdf& g, const Distribution& cut, std::size_t points) {
  double d = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double t = GridCdf::node_position(i, points);
    d = std::max(d, std::fabs(ell_cdf_general(g, cut, t) - ell_cdf(cut, t)));
  }
  return d;
}

/// Iterates the transition operator on a grid CDF and checks the measured
/// distances against the convergence bounds.
inline ExperimentReport run_operator_experiment(const OperatorConfig& cfg) {
  detail::require(cfg.grid >= 2, "--grid must be at least 2");
  detail::require(cfg.k >= 1, "--iters must be at least 1");
  detail::require(cfg.delta > 0.0 && cfg.delta < 0.5, "--delta must lie in (0, 1/2)");
  detail::require(cfg.ell_points >= 2, "ell grid needs at least two points");
  const Distribution cut = parse_distribution(cfg.cut_spec);
  const GridCdf g0 = initial_cdf(cfg.g0_spec, cfg.grid);
  const auto iterates = iterate_operator(g0, cut, cfg.k);
  const MarkovOperator op(cut);

  const double eps = g0.edge_deviation(cfg.delta);
  const double limit_mean = expected_contraction(cut);
  const double limit_var = contraction_variance(cut);

  ExperimentReport report;
  report.experiment = "operator";
  report.set_config("g0", cfg.g0_spec);
  report.set_config("dist", cut.spec());
  report.set_config("k", std::to_string(cfg.k));
  report.set_config("grid", std::to_string(cfg.grid));
  report.set_config("delta", detail::num(cfg.delta));
  report.set_config("seed", std::to_string(cfg.common.seed));

  ReportTable table{"iterations",
                    {"k", "sup_norm_distance", "rate_bound", "mean_Hk", "var_Hk", "ell_cdf_distance",
                     "ell_cdf_bound", "mean_deviation", "mean_bound"},
                    {}};
  bool rate_ok = true;
  bool ell_ok = true;
  bool mean_ok = true;
  for (std::size_t k = 0; k <= cfg.k; ++k) {
    const GridCdf& g = k == 0 ? g0 : iterates[k - 1];
    const double d = g.sup_distance_to_identity();
    const double bound = rate_bound(g0, cut, cfg.delta, eps, k);
    const auto moments = op.ell_moments(g);
    const double h_dist = ell_cdf_distance(g, cut, cfg.ell_points);
    const double mean_dev = std::fabs(moments.mean - limit_mean);
    const double mean_bound = mean_deviation_bound(g0, cut, cfg.delta, eps, k);
    rate_ok = rate_ok && d <= bound;
    ell_ok = ell_ok && h_dist <= 2.0 * d + 1e-6;
    mean_ok = mean_ok && mean_dev <= mean_bound + 1e-9;
    table.rows.push_back({static_cast<double>(k), d, bound, moments.mean, moments.variance, h_dist, 2.0 * d,
                          mean_dev, mean_bound});
  }

  report.add_scalar("eps", eps);
  report.add_scalar("contraction_rate", limit_mean);
  report.add_scalar("final_sup_norm_distance", iterates.back().sup_distance_to_identity());
  report.add_scalar("final_mean_Hk", table.rows.back()[3], limit_mean);
  report.add_scalar("final_var_Hk", table.rows.back()[4], limit_var);
  report.add_flag("rate_bound_holds", rate_ok);
  report.add_flag("ell_cdf_bound_holds", ell_ok);
  report.add_flag("mean_bound_holds", mean_ok);
  report.tables.push_back(std::move(table));
  return report;
}

// ----------------------------------------------------------------- theory

struct TheoryConfig {
  std::string cut_spec = "uniform";
  std::size_t n = 30;
  std::size_t K = 0;
  std::size_t points = 21;
};

/// Closed-form quantities for one cut law.
inline ExperimentReport run_theory_report(const TheoryConfig& cfg) {
  detail::require(cfg.points >= 2, "--grid must be at least 2");
  const Distribution cut = parse_distribution(cfg.cut_spec);
  const auto [mu, var] = cut.moments();

  ExperimentReport report;
  report.experiment = "theory";
  report.set_config("dist", cut.spec());
  report.set_config("n", std::to_string(cfg.n));
  report.set_config("K", std::to_string(cfg.K));
  report.set_config("points", std::to_string(cfg.points));

  report.add_scalar("mean", mu);
  report.add_scalar("variance", var);
  report.add_scalar("expected_cut_product", expected_cut_product(cut));
  report.add_scalar("expected_contraction", expected_contraction(cut));
  report.add_scalar("contraction_variance", contraction_variance(cut));
  report.add_scalar("expected_interval_length", expected_interval_length(cut, cfg.n));
  if (cfg.K >= 1) report.add_scalar("ksection_expected", ksection_expected(cfg.K));

  ReportTable ell{"ell_cdf", {"t", "cdf"}, {}};
  ReportTable conditional{"conditional", {"r0", "expected_length"}, {}};
  if (cfg.K >= 1) conditional.columns.emplace_back("ksection_expected_length");
  for (std::size_t i = 0; i < cfg.points; ++i) {
    const double t = GridCdf::node_position(i, cfg.points);
    ell.rows.push_back({t, ell_cdf(cut, t)});
    std::vector<double> row{t, conditional_expected_length(t, cut)};
    if (cfg.K >= 1) row.push_back(ksection_conditional(t, cfg.K));
    conditional.rows.push_back(std::move(row));
  }
  report.tables.push_back(std::move(ell));
  report.tables.push_back(std::move(conditional));
  if (cut.has_density()) {
    // Cell midpoints: the density may be unbounded at 0 or 1.
    ReportTable pdf{"ell_pdf", {"t", "pdf"}, {}};
    for (std::size_t i = 0; i < cfg.points; ++i) {
      const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(cfg.points);
      pdf.rows.push_back({t, ell_pdf(cut, t)});
    }
    report.tables.push_back(std::move(pdf));
  }
  return report;
}

}  // namespace sbisect::experiments

#endif  // SBISECT_EXPERIMENTS_HPP
