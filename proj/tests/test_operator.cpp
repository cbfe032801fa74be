// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sbisect/engine.hpp"
#include "sbisect/operator.hpp"
#include "sbisect/stats.hpp"

using namespace sbisect;

namespace {

double cubic_g0(double t) { return t * (4 * t * t - 6 * t + 3); }

/// Closed-form k-th iterate of the cubic under uniform cuts.
double cubic_iterate(double t, int k) { return t * ((2 * t * t - 3 * t + 1) / std::ldexp(1.0, k - 1) + 1); }

double max_node_error(const GridCdf& g, const std::function<double(double)>& exact) {
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::fabs(g.values()[i] - exact(g.node(i))));
  return err;
}

std::vector<Distribution> cut_laws() {
  return {Distribution::uniform(),   Distribution::beta(2, 2),      Distribution::beta(0.5, 2),
          Distribution::beta(0.1, 2), Distribution::bates(20),      Distribution::point_mass(0.5),
          Distribution::point_mass(0.3), Distribution::empirical({0.2, 0.5, 0.9})};
}

}  // namespace

// ------------------------------------------------------------------ GridCdf

TEST(GridCdf, ValidatesValues) {
  EXPECT_THROW(GridCdf({1.0}), DomainError);
  EXPECT_THROW(GridCdf({0.0, 0.5}), DomainError);
  EXPECT_THROW(GridCdf({0.0, 0.6, 0.4, 1.0}), DomainError);
  EXPECT_THROW(GridCdf({-0.1, 1.0}), DomainError);
  EXPECT_NO_THROW(GridCdf({0.0, 0.5, 0.5 - 1e-10, 1.0}));
}

TEST(GridCdf, InterpolatesLinearly) {
  const GridCdf g({0.0, 0.2, 1.0});
  EXPECT_DOUBLE_EQ(g(0.25), 0.1);
  EXPECT_DOUBLE_EQ(g(0.75), 0.6);
  EXPECT_EQ(g(0.0), 0.0);
  EXPECT_EQ(g(1.0), 1.0);
  EXPECT_EQ(g.node(1), 0.5);
}

TEST(GridCdf, DistanceAndEdgeDeviation) {
  const auto g = GridCdf::from_function(1025, cubic_g0);
  // |G0 - t| = |t(2t-1)(2t-2)| peaks at t = (3 - sqrt 3)/6 with value sqrt(3)/9.
  EXPECT_NEAR(g.sup_distance_to_identity(), std::sqrt(3.0) / 9.0, 1e-5);
  EXPECT_LE(g.edge_deviation(0.25), g.sup_distance_to_identity());
  EXPECT_EQ(GridCdf::identity(17).sup_distance_to_identity(), 0.0);
}

// ------------------------------------------------------------ apply_operator

TEST(Operator, IdentityIsFixedPoint) {
  for (const auto& law : cut_laws()) {
    const auto g = apply_operator(GridCdf::identity(), law);
    EXPECT_LT(max_node_error(g, [](double t) { return t; }), 1e-9) << law.spec();
  }
}

TEST(Operator, LinearFunctionsAreFixedPoints) {
  for (const auto& law : cut_laws()) {
    const MarkovOperator op(law);
    for (auto [a, b] : {std::pair{0.3, 2.0}, {-1.0, 0.5}, {0.0, 1.0}}) {
      for (double t = 0.0; t <= 1.0; t += 0.125) {
        EXPECT_NEAR(op.evaluate([a = a, b = b](double x) { return a + b * x; }, t), a + b * t, 1e-9) << law.spec();
      }
    }
  }
}

TEST(Operator, CubicIteratesMatchClosedForm) {
  const auto iterates = iterate_operator(GridCdf::from_function(2049, cubic_g0), Distribution::uniform(), 3);
  for (int k = 1; k <= 3; ++k) {
    EXPECT_LT(max_node_error(iterates[k - 1], [k](double t) { return cubic_iterate(t, k); }), 1e-6) << k;
  }
}

TEST(Operator, CubicDeviationHalvesEachStep) {
  const auto g0 = GridCdf::from_function(2049, cubic_g0);
  const auto iterates = iterate_operator(g0, Distribution::uniform(), 6);
  double prev = iterates[0].sup_distance_to_identity();
  for (std::size_t k = 1; k < iterates.size(); ++k) {
    const double d = iterates[k].sup_distance_to_identity();
    EXPECT_NEAR(d / prev, 0.5, 1e-4) << k;
    prev = d;
  }
}

TEST(Operator, QuadraticMapsToClosedForm) {
  for (const auto& law : cut_laws()) {
    const MarkovOperator op(law);
    const auto [mu, var] = law.moments();
    const double q = mu - mu * mu - var;
    for (double t = 0.0; t <= 1.0; t += 0.0625) {
      EXPECT_NEAR(op.evaluate([](double x) { return x * x; }, t), 2 * t * (1 - t) * q + t * t, 1e-8)
          << law.spec() << " t=" << t;
    }
  }
}

TEST(Operator, MidpointCutSpecialization) {
  RandomStream rng(40);
  std::vector<double> v(513);
  double acc = 0.0;
  for (auto& x : v) {
    acc += rng.uniform01();
    x = acc;
  }
  for (auto& x : v) x = (x - v.front()) / (v.back() - v.front());
  const GridCdf g(v);
  const auto tg = apply_operator(g, Distribution::point_mass(0.5));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double t = g.node(i);
    EXPECT_NEAR(tg.values()[i], g(t / 2) + g((t + 1) / 2) - g(0.5), 1e-12) << t;
  }
}

TEST(Operator, PreservesEndpointsAndMonotonicity) {
  const std::vector<GridCdf> inputs = {GridCdf::from_function(1025, cubic_g0),
                                       GridCdf::from_distribution(Distribution::beta(0.1, 2), 1025),
                                       GridCdf::from_distribution(Distribution::beta(5, 50), 1025),
                                       GridCdf::from_distribution(Distribution::bates(20), 1025)};
  for (const auto& law : cut_laws()) {
    const MarkovOperator op(law);
    for (const auto& g : inputs) {
      const auto raw = op.apply_raw(g);
      EXPECT_NEAR(raw.front(), g.values().front(), 1e-12) << law.spec();
      EXPECT_NEAR(raw.back(), 1.0, 1e-12) << law.spec();
      for (std::size_t i = 1; i < raw.size(); ++i) ASSERT_GE(raw[i], raw[i - 1] - 1e-9) << law.spec();
    }
  }
}

TEST(Operator, AgreesWithOneSimulatedStep) {
  const auto root_law = Distribution::beta(2, 5);
  const auto cut = Distribution::beta(0.5, 2);
  const auto g1 = apply_operator(GridCdf::from_distribution(root_law), cut);
  const std::size_t m = 200'000;
  std::vector<double> next(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto rng = RandomStream::derive(41, "one-step", i);
    double r = root_law.sample(rng);
    while (!(r > 0.0 && r < 1.0)) r = root_law.sample(rng);
    next[i] = rescaled_run(r, cut, 0.0, 1, rng).final_r();
  }
  EXPECT_LT(ks_statistic(next, [&g1](double t) { return g1(t); }), ks_critical_value(0.01, m));
}

// ------------------------------------------------------------ iterate_operator

TEST(Iterate, IdentityStaysIdentity) {
  for (const auto& g : iterate_operator(GridCdf::identity(), Distribution::beta(2, 2), 5)) {
    EXPECT_LT(g.sup_distance_to_identity(), 1e-9);
  }
}

TEST(Iterate, SingularStartDecaysNoSlowerThanTheory) {
  const auto cut = Distribution::uniform();
  const auto iterates = iterate_operator(GridCdf::from_distribution(Distribution::beta(0.5, 2)), cut, 30);
  std::vector<double> d;
  for (const auto& g : iterates) d.push_back(g.sup_distance_to_identity());
  for (std::size_t k = 1; k < d.size(); ++k) EXPECT_LE(d[k], d[k - 1] + 1e-12) << k;
  const double rate = fit_exponential_decay(std::span<const double>(d).subspan(10)).rho;
  EXPECT_LE(rate, expected_contraction(Distribution::beta(0.5, 2)) + 0.02);
}

TEST(Iterate, RejectsEndpointAtoms) {
  EXPECT_THROW(iterate_operator(GridCdf({0.5, 0.75, 1.0}), Distribution::uniform(), 1), EndpointAtomError);
  EXPECT_THROW(iterate_operator(GridCdf::identity(), Distribution::point_mass(0.0), 1), EndpointAtomError);
  EXPECT_THROW(iterate_operator(GridCdf::identity(), Distribution::empirical({0.0, 1.0}), 1), EndpointAtomError);
}

// ------------------------------------------------------------ ell_cdf_general

TEST(EllCdfGeneral, IdentityReducesToUniformRootLaw) {
  const auto id = GridCdf::identity();
  for (const auto& law : cut_laws()) {
    for (double t = 0.05; t < 1.0; t += 0.05) {
      EXPECT_NEAR(ell_cdf_general(id, law, t), ell_cdf(law, t), 1e-8) << law.spec() << " t=" << t;
    }
  }
}

TEST(EllCdfGeneral, Endpoints) {
  const auto g = GridCdf::from_function(513, cubic_g0);
  EXPECT_EQ(ell_cdf_general(g, Distribution::beta(2, 2), 0.0), 0.0);
  EXPECT_EQ(ell_cdf_general(g, Distribution::beta(2, 2), 1.0), 1.0);
}

TEST(EllCdfGeneral, DeviationBoundedByTwiceRootDeviation) {
  const auto cut = Distribution::uniform();
  const auto iterates = iterate_operator(GridCdf::from_distribution(Distribution::beta(0.1, 2)), cut, 10);
  for (const auto& g : iterates) {
    double worst = 0.0;
    for (int i = 1; i < 200; ++i) {
      const double t = i / 200.0;
      worst = std::max(worst, std::fabs(ell_cdf_general(g, cut, t) - ell_cdf(cut, t)));
    }
    EXPECT_LE(worst, 2.0 * g.sup_distance_to_identity() + 1e-6);
  }
}

TEST(EllCdfGeneral, MatchesSimulatedScalingFactorsFromFixedRootLaw) {
  const auto root_law = Distribution::beta(0.5, 2);
  const auto cut = Distribution::beta(2, 2);
  const auto g = GridCdf::from_distribution(root_law);
  const std::size_t m = 20'000;
  std::vector<double> ells(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto rng = RandomStream::derive(42, "ell", i);
    double r = root_law.sample(rng);
    while (!(r > 0.0 && r < 1.0)) r = root_law.sample(rng);
    ells[i] = rescaled_run(r, cut, 0.0, 1, rng).iterations.front().ell;
  }
  EXPECT_LT(ks_statistic(ells, [&](double t) { return ell_cdf_general(g, cut, t); }), ks_critical_value(0.01, m));
}

// ------------------------------------------------------------- moments of H_n

TEST(EllMoments, IdentityGivesClosedFormMoments) {
  for (const auto& law : cut_laws()) {
    const auto m = MarkovOperator(law).ell_moments(GridCdf::identity());
    EXPECT_NEAR(m.mean, expected_contraction(law), 1e-9) << law.spec();
    EXPECT_NEAR(m.variance, contraction_variance(law), 1e-9) << law.spec();
  }
}

TEST(EllMoments, ConvergeWithinBounds) {
  const auto cut = Distribution::beta(2, 2);
  const MarkovOperator op(cut);
  const auto g0 = GridCdf::from_distribution(Distribution::beta(0.5, 2));
  const double delta = 0.25;
  const double eps = g0.edge_deviation(delta);
  const auto iterates = iterate_operator(g0, cut, 20);
  for (std::size_t n = 0; n < iterates.size(); ++n) {
    const auto m = op.ell_moments(iterates[n]);
    const double dev = iterates[n].sup_distance_to_identity();
    EXPECT_LE(std::fabs(m.mean - expected_contraction(cut)), 2.0 * dev + 1e-9) << n;
    EXPECT_LE(std::fabs(m.mean - expected_contraction(cut)), mean_deviation_bound(g0, cut, delta, eps, n + 1)) << n;
    EXPECT_LE(std::fabs(m.variance - contraction_variance(cut)),
              variance_deviation_bound(g0, cut, delta, eps, n + 1))
        << n;
  }
}

// ---------------------------------------------------------------- rate bound

TEST(RateBound, IdentityHasZeroBound) {
  for (std::size_t k : {1u, 5u, 30u}) {
    EXPECT_EQ(rate_bound(GridCdf::identity(), Distribution::beta(2, 2), 0.2, 0.0, k), 0.0);
  }
}

TEST(RateBound, CubicFirstStepIsBelowBound) {
  const auto g0 = GridCdf::from_function(2049, cubic_g0);
  const auto cut = Distribution::uniform();
  const double eps = g0.edge_deviation(0.25);
  const auto g1 = apply_operator(g0, cut);
  EXPECT_LE(g1.sup_distance_to_identity(), rate_bound(g0, cut, 0.25, eps, 1));
}

TEST(RateBound, SingularStartStaysBelowBound) {
  const auto g0 = GridCdf::from_distribution(Distribution::beta(0.1, 2));
  const auto cut = Distribution::uniform();
  const double delta = 0.25;
  const double eps = g0.edge_deviation(delta);
  const auto iterates = iterate_operator(g0, cut, 30);
  for (std::size_t k = 0; k < iterates.size(); ++k) {
    EXPECT_LE(iterates[k].sup_distance_to_identity(), rate_bound(g0, cut, delta, eps, k + 1)) << k + 1;
  }
}

TEST(RateBound, PreconditionsAreChecked) {
  const auto g0 = GridCdf::from_function(513, cubic_g0);
  const auto cut = Distribution::uniform();
  EXPECT_THROW(rate_bound(g0, cut, 0.25, 0.0, 1), PreconditionError);
  EXPECT_THROW(rate_bound(g0, cut, 0.0, 1.0, 1), DomainError);
  EXPECT_THROW(rate_bound(g0, cut, 0.5, 1.0, 1), DomainError);
  EXPECT_THROW(mean_deviation_bound(g0, cut, 0.25, 0.0, 1), PreconditionError);
  EXPECT_THROW(variance_deviation_bound(g0, cut, 0.25, 0.0, 1), PreconditionError);
}

TEST(RateBound, VarianceBoundIsThreeTimesMeanBoundShape) {
  const auto g0 = GridCdf::from_function(513, cubic_g0);
  const auto cut = Distribution::beta(2, 2);
  const double eps = g0.edge_deviation(0.2);
  for (std::size_t n : {1u, 4u, 9u}) {
    EXPECT_NEAR(variance_deviation_bound(g0, cut, 0.2, eps, n), 3.0 * mean_deviation_bound(g0, cut, 0.2, eps, n),
                1e-15);
    EXPECT_NEAR(mean_deviation_bound(g0, cut, 0.2, eps, n) - 2.0 * eps,
                2.0 * (rate_bound(g0, cut, 0.2, eps, n) - eps), 1e-15);
  }
}
