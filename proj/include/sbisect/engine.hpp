// SPDX-License-Identifier: Apache-2.0
#ifndef SBISECT_ENGINE_HPP
#define SBISECT_ENGINE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "sbisect/distributions.hpp"
#include "sbisect/errors.hpp"
#include "sbisect/random.hpp"

namespace sbisect {

/// State after iteration n (n >= 1): the interval [a, b], the cut that
/// produced it, the scaling factor ell = (b - a) / (previous length), the
/// cumulative length L relative to the starting interval, and the root's
/// relative position in [a, b].
struct IterationRecord {
  std::size_t n = 0;
  double a = 0.0;
  double b = 1.0;
  double cut = 0.5;
  double ell = 1.0;
  double L = 1.0;
  double log_L = 0.0;
  double r_normalized = std::numeric_limits<double>::quiet_NaN();
};

enum class Termination { Tolerance, MaxIterations };

struct RunTrace {
  double a0 = 0.0;
  double b0 = 1.0;
  double r0 = std::numeric_limits<double>::quiet_NaN();
  std::vector<IterationRecord> iterations;
  Termination terminated_by = Termination::MaxIterations;
  /// Set when the running product L fell below the normal double range;
  /// log_L remains exact in that case.
  bool underflow = false;

  [[nodiscard]] std::size_t iteration_count() const { return iterations.size(); }
  [[nodiscard]] double final_length() const {
    return iterations.empty() ? b0 - a0 : iterations.back().b - iterations.back().a;
  }
  [[nodiscard]] double final_L() const { return iterations.empty() ? 1.0 : iterations.back().L; }
  [[nodiscard]] double final_r() const { return iterations.empty() ? r0 : iterations.back().r_normalized; }
};

inline constexpr int kMaxCutRedraws = 100;

/// Draw a cut strictly inside (0,1). Draws at exactly 0 or 1 are rejected;
/// a law that produces them 100 times in a row is treated as degenerate.
inline double draw_interior_cut(const Distribution& cut_dist, RandomStream& rng) {
  for (int attempt = 0; attempt <= kMaxCutRedraws; ++attempt) {
    const double c = cut_dist.sample(rng);
    if (c > 0.0 && c < 1.0) return c;
  }
  throw DomainError("cut distribution " + cut_dist.spec() + " keeps producing cuts at the endpoints 0 or 1");
}

/// The rescaling map: r / c when c >= r, otherwise (r - c) / (1 - c).
inline double skewed_dyadic(double c, double r) {
  if (!(c > 0.0 && c < 1.0)) throw DomainError("skewed_dyadic requires 0 < c < 1");
  if (c >= r) return r / c;
  return (r - c) / (1.0 - c);
}

namespace detail {

inline void push_record(RunTrace& trace, double a, double b, double cut, double ell, double root) {
  const double prev_log = trace.iterations.empty() ? 0.0 : trace.iterations.back().log_L;
  const double prev_L = trace.iterations.empty() ? 1.0 : trace.iterations.back().L;
  IterationRecord rec;
  rec.n = trace.iterations.size() + 1;
  rec.a = a;
  rec.b = b;
  rec.cut = cut;
  rec.ell = ell;
  rec.L = prev_L * ell;
  rec.log_L = prev_log + std::log(ell);
  rec.r_normalized = std::isnan(root) ? root : std::clamp((root - a) / (b - a), 0.0, 1.0);
  if (rec.L < std::numeric_limits<double>::min()) trace.underflow = true;
  trace.iterations.push_back(rec);
}

}  // namespace detail

/// Stochastic bisection on [a, b]: each cut is a + (b - a) * c with c drawn
/// from `cut_dist` on (0,1); the half with the sign change is kept. Runs
/// while b_n - a_n >= tol and n < max_iter. When the true root is known it
/// can be passed to record normalized root positions. A cut that hits the
/// root exactly becomes the left endpoint; the left sign is kept, so later
/// cuts keep the root bracketed at a.
template <class F>
RunTrace bisection_run(F&& f, double a, double b, const Distribution& cut_dist, double tol, std::size_t max_iter,
                       RandomStream& rng, std::optional<double> known_root = std::nullopt) {
  if (!(a < b)) throw InvalidBracketError("bisection_run requires a < b");
  double fa = f(a);
  const double fb = f(b);
  if (!(fa * fb < 0.0)) throw InvalidBracketError("bisection_run requires f(a) * f(b) < 0");
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");

  RunTrace trace;
  trace.a0 = a;
  trace.b0 = b;
  const double root = known_root.value_or(std::numeric_limits<double>::quiet_NaN());
  trace.r0 = std::isnan(root) ? root : (root - a) / (b - a);
  trace.iterations.reserve(std::min<std::size_t>(max_iter, 256));

  while (b - a >= tol && trace.iterations.size() < max_iter) {
    double c = 0.0;
    int attempts = 0;
    do {
      if (++attempts > kMaxCutRedraws) {
        throw DomainError("cut collapsed onto an interval endpoint; interval below floating-point resolution");
      }
      c = a + (b - a) * draw_interior_cut(cut_dist, rng);
    } while (!(c > a && c < b));

    const double fc = f(c);
    const double old_length = b - a;
    if (fa * fc < 0.0) {
      b = c;
    } else {
      a = c;
      if (fc != 0.0) fa = fc;
    }
    detail::push_record(trace, a, b, c, (b - a) / old_length, root);
  }
  trace.terminated_by = b - a < tol ? Termination::Tolerance : Termination::MaxIterations;
  return trace;
}

/// One step of the rescaled method: keep [0, c] when c >= r, else [c, 1],
/// and map the root back to [0,1]. Returns {ell, r_next}.
inline std::pair<double, double> rescaled_step(double r, double c) {
  const double ell = c >= r ? c : 1.0 - c;
  return {ell, skewed_dyadic(c, r)};
}

/// Scale-invariant bisection on [0,1] tracking only the normalized root.
/// The loop is always entered at n = 0 and continues while the last
/// scaling factor is >= tol and n < max_iter.
inline RunTrace rescaled_run(double r0, const Distribution& cut_dist, double tol, std::size_t max_iter,
                             RandomStream& rng) {
  if (!(r0 > 0.0 && r0 < 1.0)) throw DomainError("rescaled_run requires 0 < r0 < 1");
  RunTrace trace;
  trace.r0 = r0;
  trace.iterations.reserve(std::min<std::size_t>(max_iter, 256));
  double r = r0;
  double ell = std::numeric_limits<double>::infinity();
  while (ell >= tol && trace.iterations.size() < max_iter) {
    const double c = draw_interior_cut(cut_dist, rng);
    const bool keep_left = c >= r;
    const auto [next_ell, next_r] = rescaled_step(r, c);
    ell = next_ell;
    const double prev_log = trace.iterations.empty() ? 0.0 : trace.iterations.back().log_L;
    const double prev_L = trace.iterations.empty() ? 1.0 : trace.iterations.back().L;
    IterationRecord rec;
    rec.n = trace.iterations.size() + 1;
    rec.a = keep_left ? 0.0 : c;
    rec.b = keep_left ? c : 1.0;
    rec.cut = c;
    rec.ell = ell;
    rec.L = prev_L * ell;
    rec.log_L = prev_log + std::log(ell);
    rec.r_normalized = next_r;
    if (rec.L < std::numeric_limits<double>::min()) trace.underflow = true;
    trace.iterations.push_back(rec);
    r = next_r;
  }
  trace.terminated_by = ell < tol ? Termination::Tolerance : Termination::MaxIterations;
  return trace;
}

/// One step of the K-cut method with i.i.d. uniform cuts: the gap of the
/// sorted cuts (with sentinels 0 and 1) containing r is kept and r is
/// rescaled into it. Returns {ell, r_next}.
inline std::pair<double, double> multisection_step(double r, std::size_t K, RandomStream& rng) {
  if (K == 0) throw DomainError("multisection_step requires K >= 1");
  const Distribution uniform = Distribution::uniform();
  double left = 0.0;
  double right = 1.0;
  for (std::size_t i = 0; i < K; ++i) {
    const double c = draw_interior_cut(uniform, rng);
    // Gap [c_(j), c_(j+1)) containing r; a cut equal to r becomes the left end.
    if (c <= r) {
      left = std::max(left, c);
    } else {
      right = std::min(right, c);
    }
  }
  const double ell = right - left;
  const double r_next = std::clamp((r - left) / ell, 0.0, 1.0);
  return {ell, r_next};
}

/// Trace export: n,a,b,cut,ell,L,r_normalized with round-trip precision.
inline void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << "n,a,b,cut,ell,L,r_normalized\n";
  char buf[256];
  for (const auto& rec : trace.iterations) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", rec.n, rec.a, rec.b, rec.cut, rec.ell,
                  rec.L, rec.r_normalized);
    out << buf;
  }
}

}  // namespace sbisect

#endif  // SBISECT_ENGINE_HPP
