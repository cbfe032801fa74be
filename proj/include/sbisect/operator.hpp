// SPDX-License-Identifier: Apache-2.0
#ifndef SBISECT_OPERATOR_HPP
#define SBISECT_OPERATOR_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "sbisect/distributions.hpp"
#include "sbisect/errors.hpp"
#include "sbisect/theory.hpp"

namespace sbisect {

inline constexpr std::size_t kDefaultGridSize = 2049;
inline constexpr double kMonotoneRepairTolerance = 1e-9;
inline constexpr double kEndpointAtomTolerance = 1e-12;

/// A CDF on [0,1] stored at the nodes i/(n-1) and linearly interpolated.
class GridCdf {
 public:
  explicit GridCdf(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) throw DomainError("GridCdf needs at least two nodes");
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double v = values_[i];
      if (!std::isfinite(v) || v < -kEndpointAtomTolerance || v > 1.0 + kEndpointAtomTolerance) {
        throw DomainError("GridCdf values must lie in [0,1]");
      }
      if (i > 0 && v < values_[i - 1] - kMonotoneRepairTolerance) throw DomainError("GridCdf values must be nondecreasing");
    }
    if (std::fabs(values_.back() - 1.0) > kEndpointAtomTolerance) throw DomainError("GridCdf must reach 1 at t = 1");
    values_.back() = 1.0;
    for (auto& v : values_) v = std::clamp(v, 0.0, 1.0);
    for (std::size_t i = 1; i < values_.size(); ++i) values_[i] = std::max(values_[i], values_[i - 1]);
  }

  static GridCdf identity(std::size_t grid_size = kDefaultGridSize) {
    return from_function(grid_size, [](double t) { return t; });
  }

  template <class G>
  static GridCdf from_function(std::size_t grid_size, G&& g) {
    if (grid_size < 2) throw DomainError("GridCdf needs at least two nodes");
    std::vector<double> v(grid_size);
    for (std::size_t i = 0; i < grid_size; ++i) v[i] = g(node_position(i, grid_size));
    return GridCdf(std::move(v));
  }

  static GridCdf from_distribution(const Distribution& dist, std::size_t grid_size = kDefaultGridSize) {
    return from_function(grid_size, [&dist](double t) { return dist.cdf(t); });
  }

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }
  [[nodiscard]] double node(std::size_t i) const { return node_position(i, values_.size()); }

  [[nodiscard]] double operator()(double t) const {
    if (t <= 0.0) return values_.front();
    if (t >= 1.0) return values_.back();
    const double scaled = t * static_cast<double>(values_.size() - 1);
    const auto i = std::min(static_cast<std::size_t>(scaled), values_.size() - 2);
    const double frac = scaled - static_cast<double>(i);
    return values_[i] + frac * (values_[i + 1] - values_[i]);
  }

  /// max over nodes of |G(t) - t|.
  [[nodiscard]] double sup_distance_to_identity() const {
    double d = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) d = std::max(d, std::fabs(values_[i] - node(i)));
    return d;
  }

  /// max of |G(t) - t| over nodes in [0, delta) and (1 - delta, 1].
  [[nodiscard]] double edge_deviation(double delta) const {
    double d = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const double t = node(i);
      if (t < delta || t > 1.0 - delta) d = std::max(d, std::fabs(values_[i] - t));
    }
    return d;
  }

  static double node_position(std::size_t i, std::size_t grid_size) {
    if (i + 1 == grid_size) return 1.0;
    return static_cast<double>(i) / static_cast<double>(grid_size - 1);
  }

 private:
  std::vector<double> values_;
};

/// Mean and variance of a scaling factor.
struct EllMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// The transition operator on root CDFs for a fixed cut law:
/// (TG)(t) = E[G(tc) + G(t + (1-t)c) - G(c)].
/// The quadrature rule for dF is built once; atoms are exact.
class MarkovOperator {
 public:
  explicit MarkovOperator(Distribution cut_dist) : cut_dist_(std::move(cut_dist)), rule_(cut_dist_.rule()) {}

  [[nodiscard]] const Distribution& cut_distribution() const { return cut_dist_; }
  [[nodiscard]] const QuadratureRule& rule() const { return rule_; }

  /// (Tg)(t) for an arbitrary function g on [0,1].
  template <class G>
  [[nodiscard]] double evaluate(G&& g, double t) const {
    const double constant = rule_.apply(g);
    return rule_.apply([&](double c) { return g(t * c) + g(t + (1.0 - t) * c); }) - constant;
  }

  /// Node values of TG before monotone repair.
  [[nodiscard]] std::vector<double> apply_raw(const GridCdf& g) const {
    const double constant = rule_.apply(g);
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double t = g.node(i);
      out[i] = rule_.apply([&](double c) { return g(t * c) + g(t + (1.0 - t) * c); }) - constant;
    }
    return out;
  }

  /// TG on the same grid, with inversions from rounding removed by a
  /// running maximum. Inversions above 1e-9 raise a NumericalError.
  [[nodiscard]] GridCdf apply(const GridCdf& g) const {
    auto out = apply_raw(g);
    double repair = 0.0;
    for (std::size_t i = 1; i < out.size(); ++i) {
      if (out[i] < out[i - 1]) {
        repair = std::max(repair, out[i - 1] - out[i]);
        out[i] = out[i - 1];
      }
    }
    if (repair > kMonotoneRepairTolerance) {
      throw NumericalError("operator output lost monotonicity beyond tolerance");
    }
    last_repair_ = repair;
    out.front() = std::clamp(out.front(), 0.0, 1.0);
    out.back() = 1.0;
    for (auto& v : out) v = std::clamp(v, 0.0, 1.0);
    return GridCdf(std::move(out));
  }

  /// Largest monotone repair made by the most recent apply().
  [[nodiscard]] double last_repair() const { return last_repair_; }

  /// Moments of ell when the root has CDF g: ell = c with probability g(c),
  /// otherwise 1 - c.
  [[nodiscard]] EllMoments ell_moments(const GridCdf& g) const {
    const double mean = rule_.apply([&](double c) { return c * g(c) + (1.0 - c) * (1.0 - g(c)); });
    const double second = rule_.apply([&](double c) { return c * c * g(c) + (1.0 - c) * (1.0 - c) * (1.0 - g(c)); });
    return {mean, std::max(0.0, second - mean * mean)};
  }

 private:
  Distribution cut_dist_;
  QuadratureRule rule_;
  mutable double last_repair_ = 0.0;
};

inline GridCdf apply_operator(const GridCdf& g, const Distribution& cut_dist) {
  return MarkovOperator(cut_dist).apply(g);
}

/// G_1, ..., G_k with G_{j+1} = T G_j.
inline std::vector<GridCdf> iterate_operator(const GridCdf& g0, const Distribution& cut_dist, std::size_t k) {
  if (g0.values().front() > kEndpointAtomTolerance || g0.values().back() < 1.0 - kEndpointAtomTolerance) {
    throw EndpointAtomError("initial root CDF has an atom at an endpoint");
  }
  if (cut_dist.is_endpoint_atom()) {
    throw EndpointAtomError("cut law " + cut_dist.spec() + " only cuts at the endpoints");
  }
  const MarkovOperator op(cut_dist);
  std::vector<GridCdf> out;
  out.reserve(k);
  const GridCdf* current = &g0;
  for (std::size_t j = 0; j < k; ++j) {
    out.push_back(op.apply(*current));
    current = &out.back();
  }
  return out;
}

/// P[ell_n < t] when the root has CDF g: the integral of g dF over {c < t}
/// plus the integral of (1 - g) dF over {c > 1 - t}.
inline double ell_cdf_general(const GridCdf& g, const Distribution& cut_dist, double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const std::array<double, 2> splits{t, 1.0 - t};
  const double low = stieltjes_expectation(cut_dist, g, Range{0.0, t, true, false}, splits);
  const double high =
      stieltjes_expectation(cut_dist, [&g](double c) { return 1.0 - g(c); }, Range{1.0 - t, 1.0, false, true}, splits);
  return low + high;
}

namespace detail {

inline void check_band(double delta) {
  if (!(delta > 0.0 && delta < 0.5)) throw DomainError("delta must lie in (0, 1/2)");
}

inline double checked_eps(const GridCdf& g0, double delta, double eps) {
  check_band(delta);
  if (!(eps >= 0.0)) throw DomainError("eps must be nonnegative");
  if (g0.edge_deviation(delta) > eps) {
    throw PreconditionError("|G0(t) - t| exceeds eps on the edge bands [0,delta) and (1-delta,1]");
  }
  return eps;
}

}  // namespace detail

/// Uniform-convergence bound after k steps:
/// eps + ||G0 - t|| rho^k / (4 delta (1 - delta)), rho the expected contraction.
inline double rate_bound(const GridCdf& g0, const Distribution& cut_dist, double delta, double eps, std::size_t k) {
  detail::checked_eps(g0, delta, eps);
  const double rho = expected_contraction(cut_dist);
  return eps + g0.sup_distance_to_identity() * std::pow(rho, static_cast<double>(k)) / (4.0 * delta * (1.0 - delta));
}

/// Bound on |E[ell_n] - E[ell]|: 2 eps + ||G0 - t|| rho^n / (2 delta (1 - delta)).
inline double mean_deviation_bound(const GridCdf& g0, const Distribution& cut_dist, double delta, double eps,
                                   std::size_t n) {
  detail::checked_eps(g0, delta, eps);
  const double rho = expected_contraction(cut_dist);
  return 2.0 * eps +
         g0.sup_distance_to_identity() * std::pow(rho, static_cast<double>(n)) / (2.0 * delta * (1.0 - delta));
}

/// Bound on |Var[ell_n] - Var[ell]|: 6 eps + 3 ||G0 - t|| rho^n / (2 delta (1 - delta)).
inline double variance_deviation_bound(const GridCdf& g0, const Distribution& cut_dist, double delta, double eps,
                                       std::size_t n) {
  detail::checked_eps(g0, delta, eps);
  const double rho = expected_contraction(cut_dist);
  return 6.0 * eps +
         3.0 * g0.sup_distance_to_identity() * std::pow(rho, static_cast<double>(n)) / (2.0 * delta * (1.0 - delta));
}

}  // namespace sbisect

#endif  // SBISECT_OPERATOR_HPP
