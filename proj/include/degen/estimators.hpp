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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "degen/errors.hpp"
#include "degen/kernels.hpp"
#include "degen/linalg.hpp"
#include "degen/modulus.hpp"

namespace degen {

/// Normal equations of the weighted least-squares fit at x0 with bandwidth h,
/// in the scaled basis phi_j(x) = ((x - x0)/h)^j.
struct LocalSystem {
  SquareMatrix matrix;
  std::vector<double> rhs;
  std::size_t count = 0;  // observations with |X - x0| <= h
};

struct LocalPolyFit {
  std::vector<double> theta_hat;
  double estimate = 0.0;
  std::size_t n_in_window = 0;
  double lambda_min = 0.0;  // smallest eigenvalue of matrix / count
  bool corrected = false;
  bool omega_event = false;
  double bandwidth_used = 0.0;
};

inline LocalSystem build_system(std::span<const double> xs, std::span<const double> ys, double x0,
                                double h, const Kernel& kernel, unsigned degree) {
  if (!(h > 0.0)) throw DomainError("build_system: bandwidth must be positive");
  if (xs.size() != ys.size()) throw DomainError("build_system: xs and ys differ in length");
  const std::size_t dim = degree + 1;
  LocalSystem sys{SquareMatrix(dim), std::vector<double>(dim, 0.0), 0};
  std::vector<double> phi(dim);
  // Moments of the weights, sum_i u_i^m K(u_i) for m <= 2 degree; the
  // matrix is Hankel in this basis.
  std::vector<double> moments(2 * degree + 1, 0.0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - x0;
    if (std::abs(d) > h) continue;
    ++sys.count;
    const double u = d / h;
    const double w = kernel(u);
    if (w == 0.0) continue;
    double p = w;
    for (std::size_t m = 0; m < moments.size(); ++m) {
      moments[m] += p;
      if (m < dim) sys.rhs[m] += p * ys[i];
      p *= u;
    }
  }
  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t l = 0; l < dim; ++l) sys.matrix(j, l) = moments[j + l];
  }
  return sys;
}

/// Solves the normal equations, adding sqrt(N) I when the smallest
/// eigenvalue does not exceed sqrt(N). An empty window gives the zero fit.
inline LocalPolyFit corrected_solve(const LocalSystem& sys) {
  const std::size_t dim = sys.matrix.dim();
  LocalPolyFit fit;
  fit.theta_hat.assign(dim, 0.0);
  fit.n_in_window = sys.count;
  if (sys.count == 0) return fit;
  const double n = static_cast<double>(sys.count);
  const double root_n = std::sqrt(n);
  const double lambda = smallest_eigenvalue(sys.matrix);
  fit.lambda_min = lambda / n;
  fit.omega_event = fit.lambda_min > 1.0 / root_n;
  if (lambda <= root_n) {
    SquareMatrix tilde = sys.matrix;
    for (std::size_t j = 0; j < dim; ++j) tilde(j, j) += root_n;
    fit.theta_hat = solve_symmetric(tilde, sys.rhs);
    fit.corrected = true;
  } else {
    fit.theta_hat = solve_symmetric(sys.matrix, sys.rhs);
  }
  fit.estimate = fit.theta_hat[0];
  return fit;
}

inline LocalPolyFit local_poly_fit(std::span<const double> xs, std::span<const double> ys,
                                   double x0, double h, const Kernel& kernel, unsigned degree) {
  LocalPolyFit fit = corrected_solve(build_system(xs, ys, x0, h, kernel, degree));
  fit.bandwidth_used = h;
  return fit;
}

/// Smallest h in (0, 1] with omega(h) >= sigma / sqrt(N_h), or 1 when none.
///
/// N_h is a step function of h, so the infimum sits either at an order
/// statistic of the distances or at an inverse-modulus point between two of
/// them.
inline double select_bandwidth(std::span<const double> xs, double x0, const Modulus& modulus,
                               double sigma) {
  if (xs.empty()) throw DomainError("select_bandwidth: empty sample");
  std::vector<double> d(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) d[i] = std::abs(xs[i] - x0);
  std::sort(d.begin(), d.end());
  const std::size_t n = d.size();
  for (std::size_t i = 1; i <= n; ++i) {
    const double inv = modulus.inverse(sigma / std::sqrt(static_cast<double>(i)));
    const double lower = std::max(d[i - 1], inv);
    if (!(lower <= 1.0)) continue;
    const double next = (i < n) ? d[i] : std::numeric_limits<double>::infinity();
    if (lower < next) return std::max(lower, std::numeric_limits<double>::min());
  }
  return 1.0;
}

inline LocalPolyFit estimate_adaptive(std::span<const double> xs, std::span<const double> ys,
                                      double x0, const Modulus& modulus, double sigma,
                                      const Kernel& kernel) {
  const double h = select_bandwidth(xs, x0, modulus, sigma);
  return local_poly_fit(xs, ys, x0, h, kernel, modulus.degree());
}

/// Mean response over the closed window |X - x0| <= h; 0 when empty.
inline double regressogram(std::span<const double> xs, std::span<const double> ys, double x0,
                           double h) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::abs(xs[i] - x0) <= h) {
      sum += ys[i];
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

/// Kernel average over two windows of half-width aux centred at x0 - h and
/// x0 + h; 0 when both are empty.
inline double gamma_two_window(std::span<const double> xs, std::span<const double> ys, double x0,
                               double h, double aux, const Kernel& kernel) {
  if (!(h > 0.0) || !(aux > 0.0)) throw DomainError("gamma_two_window: h and aux must be positive");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = kernel((xs[i] - h - x0) / aux) + kernel((xs[i] + h - x0) / aux);
    if (w == 0.0) continue;
    num += w * ys[i];
    den += w;
  }
  return den == 0.0 ? 0.0 : num / den;
}

/// (1/N) sum over the window of u^alpha K(u), u = (X - x0)/h.
inline double kernel_moment_stat(std::span<const double> xs, double x0, double h,
                                 const Kernel& kernel, unsigned alpha) {
  if (!(h > 0.0)) throw DomainError("kernel_moment_stat: bandwidth must be positive");
  double sum = 0.0;
  std::size_t count = 0;
  for (double x : xs) {
    const double d = x - x0;
    if (std::abs(d) > h) continue;
    ++count;
    const double u = d / h;
    sum += std::pow(u, static_cast<double>(alpha)) * kernel(u);
  }
  if (count == 0) throw DomainError("kernel_moment_stat: no observations in the window");
  return sum / static_cast<double>(count);
}

}  // namespace degen
