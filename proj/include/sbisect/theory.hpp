// SPDX-License-Identifier: Apache-2.0
#ifndef SBISECT_THEORY_HPP
#define SBISECT_THEORY_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "sbisect/distributions.hpp"
#include "sbisect/errors.hpp"

namespace sbisect {

/// E[c(1 - c)] = mu - mu^2 - sigma^2 for cuts c ~ dist. Always in [0, 1/4].
inline double expected_cut_product(const Distribution& cut_dist) {
  const auto [mu, var] = cut_dist.moments();
  return std::clamp(mu - mu * mu - var, 0.0, 0.25);
}

/// E[ell_1 | r0]: the cut lands at or right of the root with ell = c,
/// otherwise ell = 1 - c.
inline double conditional_expected_length(double r0, const Distribution& cut_dist) {
  if (!(r0 >= 0.0 && r0 <= 1.0)) throw DomainError("conditional_expected_length requires r0 in [0,1]");
  const std::array<double, 1> split{r0};
  const double right = stieltjes_expectation(cut_dist, [](double c) { return c; }, Range{r0, 1.0, true, true}, split);
  const double left =
      stieltjes_expectation(cut_dist, [](double c) { return 1.0 - c; }, Range{0.0, r0, true, false}, split);
  return right + left;
}

/// Expected scaling factor under a uniform root: 1 - 2 E[c(1-c)], in [1/2, 1].
inline double expected_contraction(const Distribution& cut_dist) {
  return 1.0 - 2.0 * expected_cut_product(cut_dist);
}

/// Variance of the scaling factor under a uniform root: q(1 - 4q).
inline double contraction_variance(const Distribution& cut_dist) {
  const double q = expected_cut_product(cut_dist);
  return std::max(0.0, q * (1.0 - 4.0 * q));
}

/// H(t) = P[ell < t] under a uniform root: the integral of c dF over
/// {c < t} plus the integral of (1 - c) dF over {c > 1 - t}.
inline double ell_cdf(const Distribution& cut_dist, double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const std::array<double, 2> splits{t, 1.0 - t};
  const double low = stieltjes_expectation(cut_dist, [](double c) { return c; }, Range{0.0, t, true, false}, splits);
  const double high =
      stieltjes_expectation(cut_dist, [](double c) { return 1.0 - c; }, Range{1.0 - t, 1.0, false, true}, splits);
  return low + high;
}

/// Density of ell under a uniform root: t (f(t) + f(1 - t)).
inline double ell_pdf(const Distribution& cut_dist, double t) {
  if (!cut_dist.has_density()) throw NoDensityError("ell_pdf needs a cut law with a density, got " + cut_dist.spec());
  if (t <= 0.0 || t > 1.0) return 0.0;
  return t * (cut_dist.density(t) + cut_dist.mirrored_density(t));
}

/// E[L_n] = (expected contraction)^n; the scaling factors are independent.
inline double expected_interval_length(const Distribution& cut_dist, std::size_t n) {
  return std::pow(expected_contraction(cut_dist), static_cast<double>(n));
}

/// E[ell_1 | r0] for K i.i.d. uniform cuts: (2 - r0^(K+1) - (1-r0)^(K+1)) / (K+1).
inline double ksection_conditional(double r0, std::size_t K) {
  if (K == 0) throw DomainError("ksection_conditional requires K >= 1");
  if (!(r0 >= 0.0 && r0 <= 1.0)) throw DomainError("ksection_conditional requires r0 in [0,1]");
  const double k1 = static_cast<double>(K + 1);
  return (2.0 - std::pow(r0, k1) - std::pow(1.0 - r0, k1)) / k1;
}

/// Expected scaling factor of the K-cut method: 2 / (K + 2).
inline double ksection_expected(std::size_t K) {
  if (K == 0) throw DomainError("ksection_expected requires K >= 1");
  return 2.0 / static_cast<double>(K + 2);
}

}  // namespace sbisect

#endif  // SBISECT_THEORY_HPP
