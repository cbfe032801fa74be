// SPDX-License-Identifier: Apache-2.0
// Umbrella header for the stochastic bisection library.
#ifndef SBISECT_SBISECT_HPP
#define SBISECT_SBISECT_HPP

#include "sbisect/distributions.hpp"
#include "sbisect/engine.hpp"
#include "sbisect/errors.hpp"
#include "sbisect/experiments.hpp"
#include "sbisect/operator.hpp"
#include "sbisect/random.hpp"
#include "sbisect/report.hpp"
#include "sbisect/special.hpp"
#include "sbisect/stats.hpp"
#include "sbisect/theory.hpp"

#endif  // SBISECT_SBISECT_HPP
