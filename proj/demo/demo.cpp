// SPDX-License-Identifier: Apache-2.0
// Finds the root of cos(x) - x with Beta(2,2) cuts and compares the observed
// contraction per step with the closed-form expectation.
#include <cmath>
#include <cstdio>

#include "sbisect/sbisect.hpp"

int main() {
  using namespace sbisect;
  const Distribution cuts = Distribution::beta(2.0, 2.0);
  RandomStream rng(7);
  const auto trace = bisection_run([](double x) { return std::cos(x) - x; }, 0.0, 1.0, cuts, 1e-12, 200, rng);

  const auto& last = trace.iterations.back();
  std::printf("root in [%.15f, %.15f] after %zu iterations\n", last.a, last.b, trace.iteration_count());
  std::printf("observed per-step contraction  %.4f\n", std::exp(last.log_L / static_cast<double>(last.n)));
  std::printf("expected scaling factor        %.4f\n", expected_contraction(cuts));
  std::printf("deterministic bisection        %.4f\n", expected_contraction(Distribution::point_mass(0.5)));
  return 0;
}
