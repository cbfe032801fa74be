// SPDX-License-Identifier: Apache-2.0
#ifndef SBISECT_STATS_HPP
#define SBISECT_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sbisect/errors.hpp"
#include "sbisect/random.hpp"
#include "sbisect/special.hpp"

namespace sbisect {

enum class IntervalMethod { BootstrapPercentile, Wilson };

inline std::string to_string(IntervalMethod m) {
  return m == IntervalMethod::Wilson ? "wilson" : "bootstrap";
}

struct IntervalEstimate {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  IntervalMethod method = IntervalMethod::BootstrapPercentile;

  [[nodiscard]] bool contains(double x) const { return x >= lower && x <= upper; }
  [[nodiscard]] double midpoint() const { return 0.5 * (lower + upper); }
  [[nodiscard]] double width() const { return upper - lower; }
  [[nodiscard]] bool overlaps(double lo, double hi) const { return lower <= hi && upper >= lo; }

  bool operator==(const IntervalEstimate&) const = default;
};

inline constexpr std::size_t kDefaultResamples = 2000;

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw EmptySampleError("mean of an empty sample");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

/// Sample variance with divisor n - 1 (zero for a single value).
inline double sample_variance(std::span<const double> xs) {
  const double m = mean(xs);
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

/// Linear-interpolation quantile of sorted data (Hyndman-Fan type 7).
inline double sorted_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw EmptySampleError("quantile of an empty sample");
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Percentile bootstrap interval for the mean. The point estimate is the
/// sample mean; the interval is widened to contain it if resampling noise
/// puts it outside.
inline IntervalEstimate bootstrap_mean_ci(std::span<const double> samples, double level, std::size_t resamples,
                                          RandomStream& rng) {
  if (samples.empty()) throw EmptySampleError("bootstrap of an empty sample");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0,1)");
  if (resamples == 0) throw DomainError("bootstrap needs at least one resample");
  const double point = mean(samples);
  const auto n = static_cast<std::uint64_t>(samples.size());
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double sum = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) sum += samples[rng.index(n)];
    m = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = 1.0 - level;
  IntervalEstimate ci;
  ci.point = point;
  ci.lower = std::min(point, sorted_quantile(means, 0.5 * alpha));
  ci.upper = std::max(point, sorted_quantile(means, 1.0 - 0.5 * alpha));
  ci.level = level;
  ci.method = IntervalMethod::BootstrapPercentile;
  return ci;
}

/// Wilson score interval for a binomial proportion.
inline IntervalEstimate wilson_ci(std::uint64_t successes, std::uint64_t trials, double level) {
  if (trials == 0) throw DomainError("wilson_ci needs at least one trial");
  if (successes > trials) throw DomainError("wilson_ci: successes exceed trials");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0,1)");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z = special::normal_quantile(0.5 + 0.5 * level);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  IntervalEstimate ci;
  ci.point = p;
  ci.lower = successes == 0 ? 0.0 : std::clamp(centre - half, 0.0, p);
  ci.upper = successes == trials ? 1.0 : std::clamp(centre + half, p, 1.0);
  ci.level = level;
  ci.method = IntervalMethod::Wilson;
  return ci;
}

/// Kolmogorov-Smirnov distance between the empirical CDF of `samples` and
/// a continuous CDF.
template <class Cdf>
double ks_statistic(std::span<const double> samples, Cdf&& cdf) {
  if (samples.empty()) throw EmptySampleError("KS statistic of an empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double above = static_cast<double>(i + 1) / m - f;
    const double below = f - static_cast<double>(i) / m;
    d = std::max({d, above, below});
  }
  return d;
}

/// KS distance to the uniform law on [0,1].
inline double ks_statistic(std::span<const double> samples) {
  return ks_statistic(samples, [](double x) { return std::clamp(x, 0.0, 1.0); });
}

/// Asymptotic critical value of the one-sample KS statistic at level alpha:
/// sqrt(-ln(alpha/2) / 2) / sqrt(M).
inline double ks_critical_value(double alpha, std::size_t m) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
  if (m == 0) throw EmptySampleError("KS critical value needs a positive sample size");
  return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(static_cast<double>(m));
}

struct ExponentialFit {
  double rho = 0.0;        // decay constant: values ~ A exp(-rho n)
  double rate = 1.0;       // exp(-rho)
  double amplitude = 1.0;  // A
};

/// Least-squares line through (n, log values[n]); slope -rho.
inline ExponentialFit fit_exponential_decay(std::span<const double> values) {
  if (values.size() < 2) throw DomainError("exponential fit needs at least two values");
  for (double v : values) {
    if (!(v > 0.0)) throw NonPositiveValueError("exponential fit needs positive values");
  }
  const double n = static_cast<double>(values.size());
  const double x_mean = 0.5 * (n - 1.0);
  double y_mean = 0.0;
  for (double v : values) y_mean += std::log(v);
  y_mean /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double dx = static_cast<double>(i) - x_mean;
    sxy += dx * (std::log(values[i]) - y_mean);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;
  return {-slope, std::exp(slope), std::exp(y_mean - slope * x_mean)};
}

/// Nonlinear least squares for values[n] ~ A exp(-rho n), residuals in the
/// original scale. Gauss-Newton with step halving, started from the
/// log-linear fit. Points at the noise floor carry little weight, unlike in
/// the log-linear fit.
inline ExponentialFit fit_exponential_decay_nls(std::span<const double> values) {
  ExponentialFit fit = fit_exponential_decay(values);
  double amp = fit.amplitude;
  double rate = fit.rate;
  auto sse = [&values](double a, double q) {
    double s = 0.0;
    double pw = 1.0;
    for (double v : values) {
      const double r = v - a * pw;
      s += r * r;
      pw *= q;
    }
    return s;
  };
  double current = sse(amp, rate);
  for (int iter = 0; iter < 200; ++iter) {
    // Model a q^n; Jacobian columns q^n and a n q^(n-1).
    double jaa = 0.0, jaq = 0.0, jqq = 0.0, ga = 0.0, gq = 0.0;
    double pw = 1.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double ni = static_cast<double>(i);
      const double da = pw;
      const double dq = i == 0 ? 0.0 : amp * ni * pw / rate;
      const double r = values[i] - amp * pw;
      jaa += da * da;
      jaq += da * dq;
      jqq += dq * dq;
      ga += da * r;
      gq += dq * r;
      pw *= rate;
    }
    const double det = jaa * jqq - jaq * jaq;
    if (!(std::fabs(det) > 0.0)) break;
    double step_a = (jqq * ga - jaq * gq) / det;
    double step_q = (jaa * gq - jaq * ga) / det;
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving) {
      const double na = amp + step_a;
      const double nq = rate + step_q;
      if (na > 0.0 && nq > 0.0 && nq < 2.0) {
        const double candidate = sse(na, nq);
        if (candidate < current) {
          amp = na;
          rate = nq;
          current = candidate;
          improved = true;
          break;
        }
      }
      step_a *= 0.5;
      step_q *= 0.5;
    }
    if (!improved) break;
  }
  return {-std::log(rate), rate, amp};
}

/// Pearson correlation matrix of equal-length columns.
inline std::vector<std::vector<double>> correlation_matrix(const std::vector<std::vector<double>>& columns) {
  if (columns.size() < 2) throw DomainError("correlation matrix needs at least two columns");
  const std::size_t len = columns.front().size();
  if (len < 2) throw DomainError("correlation matrix needs at least two observations");
  for (const auto& col : columns) {
    if (col.size() != len) throw DomainError("correlation matrix columns must have equal lengths");
  }
  const std::size_t k = columns.size();
  std::vector<std::vector<double>> centred(k, std::vector<double>(len));
  std::vector<double> norms(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double m = mean(columns[j]);
    double ss = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      centred[j][i] = columns[j][i] - m;
      ss += centred[j][i] * centred[j][i];
    }
    if (!(ss > 0.0)) throw DegenerateColumnError("column " + std::to_string(j) + " has zero variance");
    norms[j] = std::sqrt(ss);
  }
  std::vector<std::vector<double>> out(k, std::vector<double>(k, 1.0));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < len; ++i) s += centred[a][i] * centred[b][i];
      const double r = std::clamp(s / (norms[a] * norms[b]), -1.0, 1.0);
      out[a][b] = r;
      out[b][a] = r;
    }
  }
  return out;
}

/// Sorted samples against uniform plotting positions (i - 0.5) / M.
inline std::vector<std::pair<double, double>> qq_points(std::span<const double> samples) {
  if (samples.empty()) throw EmptySampleError("Q-Q points of an empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  std::vector<std::pair<double, double>> out(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) out[i] = {(static_cast<double>(i) + 0.5) / m, sorted[i]};
  return out;
}

}  // namespace sbisect

#endif  // SBISECT_STATS_HPP
