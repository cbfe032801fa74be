// SPDX-License-Identifier: Apache-2.0
#ifndef SBISECT_RANDOM_HPP
#define SBISECT_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace sbisect {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// A seeded pseudo-random stream. All variates are produced by explicit
/// transformations of the raw 64-bit engine output, so a stream is
/// bit-reproducible across standard library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(detail::splitmix64(seed)) {}

  /// Counter-based derivation: the stream for (master seed, tag, index) does
  /// not depend on how many other streams were derived or in which order.
  static RandomStream derive(std::uint64_t master, std::string_view tag, std::uint64_t index) {
    std::uint64_t k = detail::splitmix64(master);
    k = detail::splitmix64(k ^ detail::fnv1a(tag));
    k = detail::splitmix64(k ^ index);
    return RandomStream(k);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0,1).
  double uniform_open() {
    for (;;) {
      const double u = uniform01();
      if (u > 0.0) return u;
    }
  }

  /// Unbiased integer in [0, n).
  std::uint64_t index(std::uint64_t n) {
    // Lemire's multiply-shift with rejection.
    __extension__ using u128 = unsigned __int128;
    u128 m = static_cast<u128>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<u128>(next_u64()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Standard normal by the Marsaglia polar method.
  double normal() {
    for (;;) {
      const double u = 2.0 * uniform01() - 1.0;
      const double v = 2.0 * uniform01() - 1.0;
      const double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
    }
  }

  /// log of a Gamma(shape, 1) variate. Marsaglia-Tsang squeeze for
  /// shape >= 1; for shape < 1 the boost G(a) = G(a+1) U^(1/a) is applied in
  /// log space so tiny shapes cannot underflow to zero.
  double log_gamma_variate(double shape) {
    if (shape < 1.0) {
      return log_gamma_variate(shape + 1.0) + std::log(uniform_open()) / shape;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return std::log(d * v);
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return std::log(d * v);
    }
  }

  double gamma(double shape) { return std::exp(log_gamma_variate(shape)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sbisect

#endif  // SBISECT_RANDOM_HPP
