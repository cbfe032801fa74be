// SPDX-License-Identifier: Apache-2.0
#ifndef SBISECT_DISTRIBUTIONS_HPP
#define SBISECT_DISTRIBUTIONS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "sbisect/errors.hpp"
#include "sbisect/random.hpp"
#include "sbisect/special.hpp"

namespace sbisect {

enum class DistributionKind { Uniform, Beta, Bates, PointMass, Empirical };

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// A subset of [0,1] for restricted Stieltjes integrals. The closedness flags
/// only matter for laws with atoms.
struct Range {
  double lo = 0.0;
  double hi = 1.0;
  bool include_lo = true;
  bool include_hi = true;

  [[nodiscard]] bool contains(double x) const {
    const bool above = include_lo ? x >= lo : x > lo;
    const bool below = include_hi ? x <= hi : x < hi;
    return above && below;
  }
};

/// Nodes and weights such that sum_j w_j g(x_j) approximates the integral of
/// g against dF over some range.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  template <class G>
  [[nodiscard]] double apply(G&& g) const {
    double sum = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) sum += weights[j] * g(nodes[j]);
    return sum;
  }

  [[nodiscard]] double total_weight() const {
    double sum = 0.0;
    for (double w : weights) sum += w;
    return sum;
  }
};

namespace quadrature {

inline constexpr std::size_t kPointsPerPanel = 16;
inline constexpr std::size_t kPanels = 64;
// Geometric refinement of the panel adjacent to a singular endpoint.
inline constexpr std::size_t kGradingLevels = 12;
inline constexpr double kGradingRatio = 0.2;

/// Append a composite Gauss-Legendre rule on [u0, u1] in some integration
/// coordinate u. `map(u)` returns {x(u), dx/du * density(x(u))}.
template <class Map>
void append_panels(QuadratureRule& rule, double u0, double u1, std::size_t panels, bool grade_low, bool grade_high,
                   Map&& map) {
  if (!(u1 > u0)) return;
  const auto& gl = special::gauss_legendre<kPointsPerPanel>();
  auto panel = [&](double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < kPointsPerPanel; ++i) {
      const double u = mid + half * gl.nodes[i];
      const auto [x, jac] = map(u);
      rule.nodes.push_back(x);
      rule.weights.push_back(gl.weights[i] * half * jac);
    }
  };
  auto graded = [&](double anchor, double other) {
    // Panels [anchor + s^(k+1) w, anchor + s^k w] for k = 0..levels-1 plus the innermost one.
    const double w = other - anchor;
    double outer = 1.0;
    for (std::size_t k = 0; k < kGradingLevels; ++k) {
      const double inner = outer * kGradingRatio;
      const double p = anchor + inner * w;
      const double q = anchor + outer * w;
      panel(std::min(p, q), std::max(p, q));
      outer = inner;
    }
    const double last = anchor + outer * w;
    panel(std::min(anchor, last), std::max(anchor, last));
  };
  const double h = (u1 - u0) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double a = u0 + h * static_cast<double>(p);
    const double b = p + 1 == panels ? u1 : a + h;
    if (p == 0 && grade_low) {
      graded(a, b);
    } else if (p + 1 == panels && grade_high) {
      graded(b, a);
    } else {
      panel(a, b);
    }
  }
}

}  // namespace quadrature

/// A probability law on [0,1] used for cuts and initial roots.
/// Immutable after construction; copies share the empirical sample storage.
class Distribution {
 public:
  struct UniformLaw {};
  struct BetaLaw {
    double alpha;
    double beta;
    double log_norm;  // log B(alpha, beta)
  };
  struct BatesLaw {
    std::size_t n;
  };
  struct PointMassLaw {
    double c;
  };
  struct EmpiricalLaw {
    std::shared_ptr<const std::vector<double>> sorted;
  };

  Distribution() : law_(UniformLaw{}) {}

  static Distribution uniform() { return Distribution(UniformLaw{}); }

  static Distribution beta(double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta)) {
      throw DomainError("beta parameters must be positive and finite");
    }
    return Distribution(BetaLaw{alpha, beta, special::log_beta(alpha, beta)});
  }

  static Distribution bates(std::size_t n) {
    if (n == 0) throw DomainError("bates order must be a positive integer");
    return Distribution(BatesLaw{n});
  }

  static Distribution point_mass(double c) {
    if (!(c >= 0.0 && c <= 1.0)) throw DomainError("point mass location must lie in [0,1]");
    return Distribution(PointMassLaw{c});
  }

  static Distribution empirical(std::vector<double> samples) {
    if (samples.empty()) throw EmptySampleError("empirical distribution needs at least one sample");
    for (double x : samples) {
      if (!(x >= 0.0 && x <= 1.0)) throw DomainError("empirical samples must lie in [0,1]");
    }
    std::sort(samples.begin(), samples.end());
    return Distribution(EmpiricalLaw{std::make_shared<const std::vector<double>>(std::move(samples))});
  }

  [[nodiscard]] DistributionKind kind() const {
    return static_cast<DistributionKind>(law_.index());
  }

  [[nodiscard]] bool has_density() const {
    const auto k = kind();
    return k == DistributionKind::Uniform || k == DistributionKind::Beta || k == DistributionKind::Bates;
  }

  /// True when every draw equals 0 or 1; such laws stall the rescaled process.
  [[nodiscard]] bool is_endpoint_atom() const {
    if (const auto* p = std::get_if<PointMassLaw>(&law_)) return p->c == 0.0 || p->c == 1.0;
    if (const auto* e = std::get_if<EmpiricalLaw>(&law_)) {
      return std::all_of(e->sorted->begin(), e->sorted->end(), [](double x) { return x == 0.0 || x == 1.0; });
    }
    return false;
  }

  [[nodiscard]] const auto& law() const { return law_; }

  [[nodiscard]] std::span<const double> empirical_samples() const {
    if (const auto* e = std::get_if<EmpiricalLaw>(&law_)) return *e->sorted;
    return {};
  }

  /// One draw in [0,1]; bit-reproducible given the stream state.
  double sample(RandomStream& rng) const {
    return std::visit(
        [&rng](const auto& law) -> double {
          using L = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<L, UniformLaw>) {
            return rng.uniform01();
          } else if constexpr (std::is_same_v<L, BetaLaw>) {
            const double ga = rng.log_gamma_variate(law.alpha);
            const double gb = rng.log_gamma_variate(law.beta);
            // X = Ga / (Ga + Gb), evaluated from log variates.
            return 1.0 / (1.0 + std::exp(gb - ga));
          } else if constexpr (std::is_same_v<L, BatesLaw>) {
            double sum = 0.0;
            for (std::size_t i = 0; i < law.n; ++i) sum += rng.uniform01();
            return sum / static_cast<double>(law.n);
          } else if constexpr (std::is_same_v<L, PointMassLaw>) {
            return law.c;
          } else {
            return (*law.sorted)[rng.index(law.sorted->size())];
          }
        },
        law_);
  }

  /// F(x) = P(X <= x).
  [[nodiscard]] double cdf(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("cdf argument must lie in [0,1]");
    return std::visit(
        [x](const auto& law) -> double {
          using L = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<L, UniformLaw>) {
            return x;
          } else if constexpr (std::is_same_v<L, BetaLaw>) {
            return special::incomplete_beta(law.alpha, law.beta, x);
          } else if constexpr (std::is_same_v<L, BatesLaw>) {
            const double n = static_cast<double>(law.n);
            return special::irwin_hall_cdf(law.n, n * x);
          } else if constexpr (std::is_same_v<L, PointMassLaw>) {
            return x >= law.c ? 1.0 : 0.0;
          } else {
            const auto& s = *law.sorted;
            const auto count = std::upper_bound(s.begin(), s.end(), x) - s.begin();
            return static_cast<double>(count) / static_cast<double>(s.size());
          }
        },
        law_);
  }

  /// Probability density; only for Uniform, Beta and Bates.
  [[nodiscard]] double density(double x) const {
    if (!has_density()) throw NoDensityError("distribution " + spec() + " has no density");
    if (x < 0.0 || x > 1.0) return 0.0;
    return std::visit(
        [x](const auto& law) -> double {
          using L = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<L, UniformLaw>) {
            return 1.0;
          } else if constexpr (std::is_same_v<L, BetaLaw>) {
            return std::exp((law.alpha - 1.0) * std::log(x) + (law.beta - 1.0) * std::log1p(-x) - law.log_norm);
          } else if constexpr (std::is_same_v<L, BatesLaw>) {
            const double n = static_cast<double>(law.n);
            return n * special::irwin_hall_pdf(law.n, n * x);
          } else {
            return 0.0;
          }
        },
        law_);
  }

  /// f(1 - s), evaluated from s so that points next to 1 keep full precision.
  [[nodiscard]] double mirrored_density(double s) const {
    if (const auto* beta = std::get_if<BetaLaw>(&law_)) {
      if (s < 0.0 || s > 1.0) return 0.0;
      return std::exp((beta->alpha - 1.0) * std::log1p(-s) + (beta->beta - 1.0) * std::log(s) - beta->log_norm);
    }
    // Uniform and Bates laws are symmetric about 1/2.
    return density(s);
  }

  [[nodiscard]] Moments moments() const {
    return std::visit(
        [](const auto& law) -> Moments {
          using L = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<L, UniformLaw>) {
            return {0.5, 1.0 / 12.0};
          } else if constexpr (std::is_same_v<L, BetaLaw>) {
            const double s = law.alpha + law.beta;
            return {law.alpha / s, law.alpha * law.beta / (s * s * (s + 1.0))};
          } else if constexpr (std::is_same_v<L, BatesLaw>) {
            return {0.5, 1.0 / (12.0 * static_cast<double>(law.n))};
          } else if constexpr (std::is_same_v<L, PointMassLaw>) {
            return {law.c, 0.0};
          } else {
            const auto& s = *law.sorted;
            const double m = static_cast<double>(s.size());
            double mean = 0.0;
            for (double v : s) mean += v;
            mean /= m;
            double ss = 0.0;
            for (double v : s) ss += (v - mean) * (v - mean);
            return {mean, ss / m};
          }
        },
        law_);
  }

  /// Quadrature rule for integrals against dF restricted to `range`.
  /// Atoms are integrated exactly; densities use composite 16-point
  /// Gauss-Legendre (64 panels over the range, split at `breakpoints`).
  /// Beta laws with a shape parameter below one are integrated in the
  /// coordinate u = x^alpha (resp. (1-x)^beta) near the singular endpoint,
  /// which turns the weight into a bounded smooth function.
  [[nodiscard]] QuadratureRule rule(Range range = {}, std::span<const double> breakpoints = {}) const {
    QuadratureRule out;
    const double lo = std::max(0.0, range.lo);
    const double hi = std::min(1.0, range.hi);
    if (const auto* p = std::get_if<PointMassLaw>(&law_)) {
      if (range.contains(p->c)) {
        out.nodes.push_back(p->c);
        out.weights.push_back(1.0);
      }
      return out;
    }
    if (const auto* e = std::get_if<EmpiricalLaw>(&law_)) {
      const double w = 1.0 / static_cast<double>(e->sorted->size());
      for (double x : *e->sorted) {
        if (range.contains(x)) {
          out.nodes.push_back(x);
          out.weights.push_back(w);
        }
      }
      return out;
    }
    if (!(hi > lo)) return out;
    std::vector<double> cuts{lo};
    for (double b : breakpoints) {
      if (b > lo && b < hi) cuts.push_back(b);
    }
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) append_density_segment(out, cuts[i], cuts[i + 1]);
    return out;
  }

  /// Canonical spec string, e.g. "beta:0.5,2".
  [[nodiscard]] std::string spec() const {
    return std::visit(
        [](const auto& law) -> std::string {
          using L = std::decay_t<decltype(law)>;
          if constexpr (std::is_same_v<L, UniformLaw>) {
            return "uniform";
          } else if constexpr (std::is_same_v<L, BetaLaw>) {
            return "beta:" + format_number(law.alpha) + "," + format_number(law.beta);
          } else if constexpr (std::is_same_v<L, BatesLaw>) {
            return "bates:" + std::to_string(law.n);
          } else if constexpr (std::is_same_v<L, PointMassLaw>) {
            return "point:" + format_number(law.c);
          } else {
            return "empirical[" + std::to_string(law.sorted->size()) + "]";
          }
        },
        law_);
  }

  static std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // Prefer the shortest representation that round-trips.
    for (int prec = 1; prec <= 17; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
      if (std::strtod(shorter, nullptr) == v) return shorter;
    }
    return buf;
  }

 private:
  using Law = std::variant<UniformLaw, BetaLaw, BatesLaw, PointMassLaw, EmpiricalLaw>;

  explicit Distribution(Law law) : law_(std::move(law)) {}

  void append_density_segment(QuadratureRule& out, double lo, double hi) const {
    using quadrature::append_panels;
    using quadrature::kPanels;
    if (std::holds_alternative<UniformLaw>(law_)) {
      append_panels(out, lo, hi, kPanels, false, false, [](double x) { return std::pair{x, 1.0}; });
      return;
    }
    if (const auto* bates = std::get_if<BatesLaw>(&law_)) {
      // Panels aligned with the knots k/n, where the density changes polynomial piece.
      const double n = static_cast<double>(bates->n);
      const std::size_t per_piece = std::max<std::size_t>(1, (kPanels + bates->n - 1) / bates->n);
      const auto first = static_cast<std::size_t>(std::floor(lo * n));
      for (std::size_t k = first; k < bates->n; ++k) {
        const double a = std::max(lo, static_cast<double>(k) / n);
        const double b = std::min(hi, static_cast<double>(k + 1) / n);
        if (a >= hi) break;
        append_panels(out, a, b, per_piece, false, false, [this](double x) { return std::pair{x, density(x)}; });
      }
      return;
    }
    const auto& beta = std::get<BetaLaw>(law_);
    const double half = 0.5;
    const std::size_t panels = kPanels / 2;
    // Left half: singular or non-smooth behaviour at 0 governed by alpha.
    if (lo < half) {
      const double a = lo;
      const double b = std::min(hi, half);
      const bool touches = a == 0.0;
      if (beta.alpha < 1.0) {
        const double scale = std::exp(-std::log(beta.alpha) - beta.log_norm);
        const double inv = 1.0 / beta.alpha;
        append_panels(out, std::pow(a, beta.alpha), std::pow(b, beta.alpha), panels, touches, false,
                      [&](double u) {
                        const double x = std::pow(u, inv);
                        return std::pair{x, scale * std::pow(1.0 - x, beta.beta - 1.0)};
                      });
      } else {
        append_panels(out, a, b, panels, touches, false, [this](double x) { return std::pair{x, density(x)}; });
      }
    }
    // Right half, mirrored in terms of beta.
    if (hi > half) {
      const double a = std::max(lo, half);
      const double b = hi;
      const bool touches = b == 1.0;
      if (beta.beta < 1.0) {
        const double scale = std::exp(-std::log(beta.beta) - beta.log_norm);
        const double inv = 1.0 / beta.beta;
        // v = (1-x)^beta runs from (1-a)^beta down to (1-b)^beta; integrate over increasing v.
        append_panels(out, std::pow(1.0 - b, beta.beta), std::pow(1.0 - a, beta.beta), panels, touches, false,
                      [&](double v) {
                        const double x = 1.0 - std::pow(v, inv);
                        return std::pair{x, scale * std::pow(x, beta.alpha - 1.0)};
                      });
      } else {
        append_panels(out, a, b, panels, false, touches, [this](double x) { return std::pair{x, density(x)}; });
      }
    }
  }

  Law law_;
};

/// Draw one value from `dist`.
inline double sample(const Distribution& dist, RandomStream& rng) { return dist.sample(rng); }

inline double cdf(const Distribution& dist, double x) { return dist.cdf(x); }

inline Moments moments(const Distribution& dist) { return dist.moments(); }

/// Integral of g against dF over [0,1].
template <class G>
double stieltjes_expectation(const Distribution& dist, G&& g) {
  return dist.rule().apply(std::forward<G>(g));
}

/// Integral of g against dF over a subset of [0,1]. Breakpoints mark
/// discontinuities or kinks of g so that panels align with them.
template <class G>
double stieltjes_expectation(const Distribution& dist, G&& g, Range range,
                             std::span<const double> breakpoints = {}) {
  return dist.rule(range, breakpoints).apply(std::forward<G>(g));
}

/// Parse a distribution spec: uniform, beta:A,B, bates:N, point:C,
/// empirical:<path> (one value per line; blank lines and '#' comments ignored).
inline Distribution parse_distribution(const std::string& text) {
  auto parse_real = [&text](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw ParseError("bad number '" + s + "' in distribution spec '" + text + "'");
    }
    if (used != s.size()) throw ParseError("bad number '" + s + "' in distribution spec '" + text + "'");
    return v;
  };
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string args = colon == std::string::npos ? std::string{} : text.substr(colon + 1);
  try {
    if (name == "uniform" && colon == std::string::npos) return Distribution::uniform();
    if (name == "beta") {
      const auto comma = args.find(',');
      if (comma == std::string::npos) throw ParseError("beta spec needs two parameters: beta:A,B");
      return Distribution::beta(parse_real(args.substr(0, comma)), parse_real(args.substr(comma + 1)));
    }
    if (name == "bates") {
      const double n = parse_real(args);
      if (!(n >= 1.0) || n != std::floor(n) || n > 1e6) throw ParseError("bates order must be a positive integer");
      return Distribution::bates(static_cast<std::size_t>(n));
    }
    if (name == "point") return Distribution::point_mass(parse_real(args));
    if (name == "empirical") {
      std::ifstream in(args);
      if (!in) throw ParseError("cannot open empirical sample file '" + args + "'");
      std::vector<double> values;
      std::string line;
      while (std::getline(in, line)) {
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        const auto end = line.find_last_not_of(" \t\r,");
        values.push_back(parse_real(line.substr(start, end - start + 1)));
      }
      return Distribution::empirical(std::move(values));
    }
  } catch (const DomainError& e) {
    throw ParseError(std::string("invalid distribution '") + text + "': " + e.what());
  } catch (const EmptySampleError& e) {
    throw ParseError(std::string("invalid distribution '") + text + "': " + e.what());
  }
  throw ParseError("unknown distribution spec '" + text + "'");
}

}  // namespace sbisect

#endif  // SBISECT_DISTRIBUTIONS_HPP
