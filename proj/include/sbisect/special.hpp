// SPDX-License-Identifier: Apache-2.0
#ifndef SBISECT_SPECIAL_HPP
#define SBISECT_SPECIAL_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "sbisect/errors.hpp"

namespace sbisect::special {

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

namespace detail {

// Continued fraction for I_x(a,b), modified Lentz evaluation.
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 300;
  constexpr double kTolerance = 1e-14;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kTolerance) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

}  // namespace detail

/// Regularized incomplete beta function I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log1p(-x) - log_beta(a, b);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * detail::beta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Values M_k(u + d), d = 0..k-1, of the cardinal B-spline of order k
/// (support [0,k]) at the shifted points of a fractional offset u in [0,1).
/// Cox-de Boor recurrence; every step is a convex combination, so there is
/// none of the cancellation of the alternating Irwin-Hall sum.
inline std::vector<double> cardinal_bspline_row(std::size_t order, double u) {
  std::vector<double> row(order, 0.0);
  row[0] = 1.0;
  for (std::size_t k = 2; k <= order; ++k) {
    const double kk = static_cast<double>(k);
    for (std::size_t d = k; d-- > 0;) {
      const double dd = static_cast<double>(d);
      const double own = d < k - 1 ? row[d] : 0.0;
      const double left = d > 0 ? row[d - 1] : 0.0;
      row[d] = ((u + dd) * own + (kk - u - dd) * left) / (kk - 1.0);
    }
  }
  return row;
}

/// Density of the sum of n independent U(0,1) variables.
inline double irwin_hall_pdf(std::size_t n, double s) {
  const double top = static_cast<double>(n);
  if (s < 0.0 || s > top) return 0.0;
  if (s == top) s = std::nextafter(top, 0.0);
  const double m = std::floor(s);
  const auto row = cardinal_bspline_row(n, s - m);
  return row[static_cast<std::size_t>(m)];
}

/// CDF of the sum of n independent U(0,1) variables, as the positive sum
/// F_n(s) = sum_{j>=0} M_{n+1}(s - j) accumulated with Neumaier summation.
inline double irwin_hall_cdf(std::size_t n, double s) {
  const double top = static_cast<double>(n);
  if (s <= 0.0) return 0.0;
  if (s >= top) return 1.0;
  // Upper half by symmetry so the tail near 1 keeps full relative accuracy.
  if (s > 0.5 * top) return 1.0 - irwin_hall_cdf(n, top - s);
  const double m = std::floor(s);
  const auto row = cardinal_bspline_row(n + 1, s - m);
  const auto last = static_cast<std::size_t>(m);
  double sum = 0.0;
  double compensation = 0.0;
  for (std::size_t d = 0; d <= last && d <= n; ++d) {
    const double t = sum + row[d];
    if (std::fabs(sum) >= std::fabs(row[d])) {
      compensation += (sum - t) + row[d];
    } else {
      compensation += (row[d] - t) + sum;
    }
    sum = t;
  }
  return std::fmin(1.0, sum + compensation);
}

/// Inverse of the standard normal CDF (Wichura, algorithm AS 241).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0,1)");
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
             45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
          133.14166789178437745) * r + 3.387132872796366608);
    const double den =
        (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
             21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
          42.313330701600911252) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value = 0.0;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
             1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
          4.6303378461565452959) * r + 1.42343711074968357734);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
             0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
          2.05319162663775882187) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
             0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
          5.4637849111641143699) * r + 6.6579046435011037772);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
             7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
          0.59983220655588793769) * r + 1.0);
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

/// Nodes and weights of the N-point Gauss-Legendre rule on [-1, 1].
template <std::size_t N>
struct GaussLegendre {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};
};

template <std::size_t N>
const GaussLegendre<N>& gauss_legendre() {
  static const GaussLegendre<N> rule = [] {
    GaussLegendre<N> gl;
    const double n = static_cast<double>(N);
    for (std::size_t i = 0; i < (N + 1) / 2; ++i) {
      double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= N; ++k) {
          const double kk = static_cast<double>(k);
          const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::fabs(dx) < 1e-16) break;
      }
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      gl.nodes[i] = -x;
      gl.nodes[N - 1 - i] = x;
      gl.weights[i] = w;
      gl.weights[N - 1 - i] = w;
    }
    return gl;
  }();
  return rule;
}

}  // namespace sbisect::special

#endif  // SBISECT_SPECIAL_HPP
