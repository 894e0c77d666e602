// Copyright 2026 The degen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "degen/errors.hpp"

namespace degen {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;  // absolute error estimate
};

inline constexpr unsigned kMaxRefinementLevels = 15;

/// Adaptive Gauss-Kronrod (15 point) on [a, b]. Panels are bisected until the
/// local error estimate drops below `rel_tol` times the local L1 norm, at most
/// kMaxRefinementLevels deep. Throws QuadratureError when the global error
/// estimate still exceeds the tolerance.
template <class F>
QuadResult integrate(F&& f, double a, double b, double rel_tol = 1e-12) {
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      std::forward<F>(f), a, b, kMaxRefinementLevels, rel_tol, &error, &l1);
  if (!std::isfinite(value)) {
    throw QuadratureError("quadrature produced a non-finite value", error);
  }
  // Allow a modest safety factor over the request: the Kronrod estimate is
  // pessimistic on smooth panels but can stall on roundoff.
  if (error > 100.0 * rel_tol * l1 + std::numeric_limits<double>::min()) {
    throw QuadratureError("quadrature failed to converge after " +
                              std::to_string(kMaxRefinementLevels) + " refinement levels",
                          error);
  }
  return {value, error};
}

/// Integral of f over [0, inf) for integrands with exponential decay.
template <class F>
QuadResult integrate_half_line(F&& f, double rel_tol = 1e-12) {
  thread_local boost::math::quadrature::exp_sinh<double> integrator;
  double error = 0.0;
  double l1 = 0.0;
  const double value = integrator.integrate(f, rel_tol, &error, &l1);
  if (!std::isfinite(value) || error > 100.0 * rel_tol * l1 + std::numeric_limits<double>::min()) {
    throw QuadratureError("half-line quadrature failed to converge", error);
  }
  return {value, error};
}

/// Integral over [a, b] of f smooth inside the interval but possibly singular
/// (algebraically or logarithmically) at the endpoints. Double-exponential
/// rule; f is never evaluated at a or b.
template <class F>
QuadResult integrate_endpoint_singular(F&& f, double a, double b, double rel_tol = 1e-12) {
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  double error = 0.0;
  double l1 = 0.0;
  const double value = integrator.integrate(f, a, b, rel_tol, &error, &l1);
  if (!std::isfinite(value) || error > 100.0 * rel_tol * l1 + std::numeric_limits<double>::min()) {
    throw QuadratureError("tanh-sinh quadrature failed to converge", error);
  }
  return {value, error};
}

/// Fixed 8-point Gauss-Legendre rule, for short panels of smooth integrands.
template <class F>
double gauss_legendre8(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 8>::integrate(std::forward<F>(f), a, b);
}

}  // namespace degen
