// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "sbisect/engine.hpp"
#include "sbisect/operator.hpp"
#include "sbisect/stats.hpp"

using namespace sbisect;

namespace {

std::vector<Distribution> cut_laws() {
  return {Distribution::uniform(),    Distribution::beta(2, 2),     Distribution::beta(0.5, 2),
          Distribution::beta(0.1, 2), Distribution::beta(2, 0.5),   Distribution::bates(20),
          Distribution::point_mass(0.5), Distribution::point_mass(0.3), Distribution::empirical({0.2, 0.5, 0.7})};
}

}  // namespace

// ----------------------------------------------------------- skewed_dyadic

TEST(SkewedDyadic, DyadicCase) { EXPECT_DOUBLE_EQ(skewed_dyadic(0.5, 0.25), 0.5); }

TEST(SkewedDyadic, RightBranch) { EXPECT_NEAR(skewed_dyadic(0.3, 0.65), 0.5, 1e-15); }

TEST(SkewedDyadic, TieTakesLeftBranch) { EXPECT_EQ(skewed_dyadic(0.3, 0.3), 1.0); }

TEST(SkewedDyadic, EndpointCutsAreDomainErrors) {
  EXPECT_THROW(skewed_dyadic(0.0, 0.5), DomainError);
  EXPECT_THROW(skewed_dyadic(1.0, 0.5), DomainError);
}

TEST(SkewedDyadic, MapsUnitIntervalIntoItself) {
  RandomStream rng(3);
  for (int i = 0; i < 100'000; ++i) {
    const double c = rng.uniform_open();
    const double r = rng.uniform01();
    const double v = skewed_dyadic(c, r);
    ASSERT_GE(v, 0.0);
    ASSERT_LE(v, 1.0);
  }
}

// ------------------------------------------------------------ bisection_run

TEST(BisectionRun, MidpointCutsNeedTwentySevenIterations) {
  RandomStream rng(1);
  const auto trace =
      bisection_run([](double x) { return x - 0.5; }, 0.0, 1.0, Distribution::point_mass(0.5), 1e-8, 1000, rng);
  EXPECT_EQ(trace.iteration_count(), 27u);
  EXPECT_EQ(trace.terminated_by, Termination::Tolerance);
}

TEST(BisectionRun, MidpointCutsAwayFromRootAlsoTakeTwentySeven) {
  RandomStream rng(1);
  const auto trace =
      bisection_run([](double x) { return x - 0.1; }, 0.0, 1.0, Distribution::point_mass(0.5), 1e-8, 1000, rng);
  EXPECT_EQ(trace.iteration_count(), 27u);
  EXPECT_DOUBLE_EQ(trace.final_length(), std::ldexp(1.0, -27));
}

TEST(BisectionRun, RootStaysBracketedForEveryCutLaw) {
  for (const auto& law : cut_laws()) {
    for (double r : {0.3, 0.5, 0.1, 0.987654321}) {
      auto rng = RandomStream::derive(7, law.spec(), static_cast<std::uint64_t>(r * 1e9));
      auto f = [r](double x) { return x - r; };
      const auto trace = bisection_run(f, 0.0, 1.0, law, 1e-12, 500, rng, r);
      double prev_a = 0.0;
      double prev_b = 1.0;
      for (const auto& rec : trace.iterations) {
        ASSERT_LE(rec.a, r) << law.spec();
        ASSERT_GE(rec.b, r) << law.spec();
        ASSERT_LE(f(rec.a) * f(rec.b), 0.0);
        ASSERT_LT(rec.a, rec.b);
        ASSERT_GE(rec.a, prev_a);
        ASSERT_LE(rec.b, prev_b);
        ASSERT_GT(rec.ell, 0.0);
        ASSERT_LE(rec.ell, 1.0);
        ASSERT_GE(rec.r_normalized, 0.0);
        ASSERT_LE(rec.r_normalized, 1.0);
        ASSERT_GE(rec.cut, prev_a);
        ASSERT_LE(rec.cut, prev_b);
        ASSERT_NEAR(rec.ell, (rec.b - rec.a) / (prev_b - prev_a), 1e-12);
        prev_a = rec.a;
        prev_b = rec.b;
      }
    }
  }
}

TEST(BisectionRun, CumulativeLengthTelescopes) {
  for (const auto& law : cut_laws()) {
    auto rng = RandomStream::derive(8, law.spec(), 0);
    const double a0 = -2.0;
    const double b0 = 3.0;
    const auto trace = bisection_run([](double x) { return std::atan(x - 0.77); }, a0, b0, law, 1e-13, 400, rng);
    double product = 1.0;
    for (const auto& rec : trace.iterations) {
      product *= rec.ell;
      ASSERT_NEAR(rec.L, (rec.b - rec.a) / (b0 - a0), 1e-12 * rec.L) << law.spec();
      ASSERT_NEAR(rec.L, product, 1e-12 * product) << law.spec();
      ASSERT_NEAR(rec.log_L, std::log(product), 1e-10) << law.spec();
    }
  }
}

TEST(BisectionRun, StopsAtToleranceOrCap) {
  RandomStream rng(9);
  const auto capped =
      bisection_run([](double x) { return x - 0.3; }, 0.0, 1.0, Distribution::uniform(), 1e-300, 15, rng);
  EXPECT_EQ(capped.iteration_count(), 15u);
  EXPECT_EQ(capped.terminated_by, Termination::MaxIterations);
  const auto done =
      bisection_run([](double x) { return x - 0.3; }, 0.0, 1.0, Distribution::uniform(), 1e-6, 100'000, rng);
  EXPECT_LT(done.final_length(), 1e-6);
  EXPECT_EQ(done.terminated_by, Termination::Tolerance);
  const auto& last = done.iterations;
  ASSERT_GE(last.size(), 2u);
  EXPECT_GE(last[last.size() - 2].b - last[last.size() - 2].a, 1e-6);
}

TEST(BisectionRun, RejectsInvalidBrackets) {
  RandomStream rng(10);
  auto f = [](double x) { return x - 0.5; };
  EXPECT_THROW(bisection_run(f, 0.6, 1.0, Distribution::uniform(), 1e-8, 10, rng), InvalidBracketError);
  EXPECT_THROW(bisection_run(f, 1.0, 0.0, Distribution::uniform(), 1e-8, 10, rng), InvalidBracketError);
  EXPECT_THROW(bisection_run(f, 0.5, 1.0, Distribution::uniform(), 1e-8, 10, rng), InvalidBracketError);
}

TEST(BisectionRun, EndpointOnlyCutLawIsDomainError) {
  RandomStream rng(11);
  EXPECT_THROW(bisection_run([](double x) { return x - 0.5; }, 0.0, 1.0, Distribution::point_mass(1.0), 1e-8, 10, rng),
               DomainError);
}

TEST(BisectionRun, UniformCutsScaleByTwoThirdsOnAverage) {
  const double root = 0.3;
  std::vector<double> ells;
  for (std::uint64_t run = 0; run < 500; ++run) {
    auto rng = RandomStream::derive(2024, "engine-test", run);
    const auto trace = bisection_run([root](double x) { return x - root; }, 0.0, 1.0, Distribution::uniform(),
                                     std::numeric_limits<double>::min(), 30, rng);
    for (const auto& rec : trace.iterations) ells.push_back(rec.ell);
  }
  // A fixed root starts away from the stationary law, so the expected mean
  // over 30 steps sits slightly above 2/3. It follows from iterating the
  // root CDF, starting from the step at the root.
  const auto uniform = Distribution::uniform();
  const MarkovOperator op(uniform);
  GridCdf g = GridCdf::from_function(4097, [root](double t) { return t >= root ? 1.0 : 0.0; });
  double expected = 0.0;
  for (int n = 0; n < 30; ++n) {
    expected += op.ell_moments(g).mean / 30.0;
    g = op.apply(g);
  }
  RandomStream boot(5);
  const auto ci = bootstrap_mean_ci(ells, 0.95, 2000, boot);
  EXPECT_NEAR(expected, 0.6697, 5e-4);
  EXPECT_TRUE(ci.contains(expected)) << ci.lower << " " << ci.upper;
  EXPECT_LT(std::fabs(ci.midpoint() - 2.0 / 3.0), 0.01);
}

TEST(BisectionRun, SameSeedSameTrace) {
  auto run = [](std::uint64_t seed) {
    RandomStream rng(seed);
    return bisection_run([](double x) { return x * x * x - 0.2; }, 0.0, 1.0, Distribution::beta(0.5, 2), 1e-10,
                         1000, rng);
  };
  std::ostringstream first;
  std::ostringstream second;
  write_trace_csv(first, run(42));
  write_trace_csv(second, run(42));
  EXPECT_EQ(first.str(), second.str());
  std::ostringstream other;
  write_trace_csv(other, run(43));
  EXPECT_NE(first.str(), other.str());
}

TEST(BisectionRun, TraceCsvHeaderAndRowCount) {
  RandomStream rng(12);
  const auto trace =
      bisection_run([](double x) { return x - 0.25; }, 0.0, 1.0, Distribution::uniform(), 1e-4, 1000, rng, 0.25);
  std::ostringstream out;
  write_trace_csv(out, trace);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n,a,b,cut,ell,L,r_normalized");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, trace.iteration_count());
}

// ------------------------------------------------------------- rescaled_run

TEST(RescaledRun, MidpointCutsFollowTheDyadicOrbit) {
  RandomStream rng(13);
  const auto trace = rescaled_run(0.25, Distribution::point_mass(0.5), 1e-300, 20, rng);
  ASSERT_EQ(trace.iteration_count(), 20u);
  double r = 0.25;
  for (std::size_t n = 0; n < 20; ++n) {
    const auto& rec = trace.iterations[n];
    r = r <= 0.5 ? 2.0 * r : 2.0 * r - 1.0;
    EXPECT_EQ(rec.ell, 0.5);
    EXPECT_EQ(rec.L, std::ldexp(1.0, -static_cast<int>(n + 1)));
    EXPECT_EQ(rec.r_normalized, r);
  }
}

TEST(RescaledRun, ProductAndRangeInvariants) {
  for (const auto& law : cut_laws()) {
    auto rng = RandomStream::derive(14, law.spec(), 0);
    const auto trace = rescaled_run(0.61803398875, law, 0.0, 200, rng);
    double product = 1.0;
    for (const auto& rec : trace.iterations) {
      product *= rec.ell;
      ASSERT_GT(rec.ell, 0.0);
      ASSERT_LE(rec.ell, 1.0);
      ASSERT_GE(rec.r_normalized, 0.0);
      ASSERT_LE(rec.r_normalized, 1.0);
      ASSERT_TRUE(rec.ell == rec.cut || rec.ell == 1.0 - rec.cut);
      ASSERT_NEAR(rec.L, product, 1e-12 * product);
    }
  }
}

TEST(RescaledRun, MatchesIntervalMethodAfterRescaling) {
  for (const auto& law : cut_laws()) {
    const double r0 = 0.377;
    auto rng_a = RandomStream::derive(15, law.spec(), 0);
    auto rng_b = RandomStream::derive(15, law.spec(), 0);
    const auto rescaled = rescaled_run(r0, law, 0.0, 25, rng_a);
    const auto interval =
        bisection_run([r0](double x) { return x - r0; }, 0.0, 1.0, law, 1e-300, 25, rng_b, r0);
    ASSERT_EQ(rescaled.iteration_count(), interval.iteration_count());
    for (std::size_t n = 0; n < rescaled.iteration_count(); ++n) {
      EXPECT_NEAR(rescaled.iterations[n].ell, interval.iterations[n].ell, 1e-9) << law.spec() << " n=" << n;
      EXPECT_NEAR(rescaled.iterations[n].r_normalized, interval.iterations[n].r_normalized, 1e-6)
          << law.spec() << " n=" << n;
    }
  }
}

TEST(RescaledRun, StopsOnceScalingFactorDropsBelowTolerance) {
  RandomStream rng(16);
  const auto trace = rescaled_run(0.5, Distribution::uniform(), 0.2, 10'000, rng);
  ASSERT_FALSE(trace.iterations.empty());
  EXPECT_LT(trace.iterations.back().ell, 0.2);
  EXPECT_EQ(trace.terminated_by, Termination::Tolerance);
  for (std::size_t i = 0; i + 1 < trace.iteration_count(); ++i) EXPECT_GE(trace.iterations[i].ell, 0.2);
}

TEST(RescaledRun, RootOutsideOpenIntervalIsDomainError) {
  RandomStream rng(17);
  EXPECT_THROW(rescaled_run(0.0, Distribution::uniform(), 1e-8, 10, rng), DomainError);
  EXPECT_THROW(rescaled_run(1.0, Distribution::uniform(), 1e-8, 10, rng), DomainError);
}

TEST(RescaledRun, UniformRootsStayUniformAfterOneStep) {
  const std::size_t runs = 10'000;
  std::vector<double> r1(runs);
  for (std::size_t i = 0; i < runs; ++i) {
    auto rng = RandomStream::derive(18, "stationary", i);
    const double r0 = rng.uniform_open();
    r1[i] = rescaled_run(r0, Distribution::uniform(), 0.0, 1, rng).final_r();
  }
  EXPECT_LT(ks_statistic(r1), ks_critical_value(0.01, runs));
}

TEST(RescaledRun, BetaTwoTwoMeanScalingFactor) {
  std::vector<double> ells;
  for (std::size_t i = 0; i < 2000; ++i) {
    auto rng = RandomStream::derive(19, "beta22", i);
    const double r0 = rng.uniform_open();
    for (const auto& rec : rescaled_run(r0, Distribution::beta(2, 2), 0.0, 30, rng).iterations) ells.push_back(rec.ell);
  }
  EXPECT_GE(mean(ells), 0.595);
  EXPECT_LE(mean(ells), 0.605);
}

TEST(RescaledRun, StationaryForSeveralSteps) {
  const std::size_t runs = 10'000;
  for (const auto& law : {Distribution::uniform(), Distribution::beta(2, 2), Distribution::beta(0.5, 2)}) {
    std::vector<std::vector<double>> by_step(10, std::vector<double>(runs));
    for (std::size_t i = 0; i < runs; ++i) {
      auto rng = RandomStream::derive(20, law.spec(), i);
      const auto trace = rescaled_run(rng.uniform_open(), law, 0.0, 10, rng);
      for (std::size_t n = 0; n < 10; ++n) by_step[n][i] = trace.iterations[n].r_normalized;
    }
    for (std::size_t n = 0; n < 10; ++n) {
      EXPECT_LT(ks_statistic(by_step[n]), ks_critical_value(0.01, runs)) << law.spec() << " n=" << n + 1;
    }
  }
}

TEST(RescaledRun, ScalingFactorsArePairwiseUncorrelated) {
  const std::size_t runs = 10'000;
  for (const auto& law : {Distribution::uniform(), Distribution::beta(2, 2), Distribution::bates(20)}) {
    std::vector<std::vector<double>> columns(5, std::vector<double>(runs));
    for (std::size_t i = 0; i < runs; ++i) {
      auto rng = RandomStream::derive(21, law.spec(), i);
      const auto trace = rescaled_run(rng.uniform_open(), law, 0.0, 5, rng);
      for (std::size_t n = 0; n < 5; ++n) columns[n][i] = trace.iterations[n].ell;
    }
    const auto corr = correlation_matrix(columns);
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        if (i == j) continue;
        EXPECT_LT(std::fabs(corr[i][j]), 4.0 / std::sqrt(static_cast<double>(runs))) << law.spec();
      }
    }
  }
}

// --------------------------------------------------------- multisection_step

TEST(Multisection, SingleCutMatchesRescaledStep) {
  for (std::uint64_t i = 0; i < 1000; ++i) {
    auto rng_a = RandomStream::derive(22, "k1", i);
    auto rng_b = RandomStream::derive(22, "k1", i);
    const double r = 0.123 + 0.7 * static_cast<double>(i) / 1000.0;
    const auto [ell, next] = multisection_step(r, 1, rng_a);
    const auto [ell_ref, next_ref] = rescaled_step(r, draw_interior_cut(Distribution::uniform(), rng_b));
    EXPECT_DOUBLE_EQ(ell, ell_ref);
    EXPECT_NEAR(next, next_ref, 1e-12);
  }
}

TEST(Multisection, MeanScalingFactorIsTwoOverKPlusTwo) {
  for (auto [K, lo, hi] : {std::tuple{std::size_t{2}, 0.495, 0.505}, {std::size_t{3}, 0.395, 0.405}}) {
    RandomStream rng(23 + K);
    double sum = 0.0;
    const std::size_t steps = 1'000'000;
    for (std::size_t i = 0; i < steps; ++i) sum += multisection_step(rng.uniform01(), K, rng).first;
    const double m = sum / static_cast<double>(steps);
    EXPECT_GE(m, lo) << K;
    EXPECT_LE(m, hi) << K;
  }
}

TEST(Multisection, RootStaysInsideKeptGap) {
  RandomStream rng(24);
  for (int i = 0; i < 100'000; ++i) {
    const double r = rng.uniform01();
    const auto [ell, next] = multisection_step(r, 4, rng);
    ASSERT_GT(ell, 0.0);
    ASSERT_LE(ell, 1.0);
    ASSERT_GE(next, 0.0);
    ASSERT_LE(next, 1.0);
  }
}

TEST(Multisection, StationaryForSeveralCutCounts) {
  const std::size_t runs = 10'000;
  for (std::size_t K : {2u, 3u, 5u}) {
    std::vector<double> r(runs);
    for (std::size_t i = 0; i < runs; ++i) {
      auto rng = RandomStream::derive(25, "multi", i * 10 + K);
      double x = rng.uniform_open();
      for (int n = 0; n < 10; ++n) x = multisection_step(x, K, rng).second;
      r[i] = x;
    }
    EXPECT_LT(ks_statistic(r), ks_critical_value(0.01, runs)) << K;
  }
}

TEST(Multisection, ZeroCutsIsDomainError) {
  RandomStream rng(26);
  EXPECT_THROW(multisection_step(0.5, 0, rng), DomainError);
}
