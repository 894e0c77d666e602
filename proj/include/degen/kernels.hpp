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
#include <string>
#include <string_view>

#include "degen/errors.hpp"
#include "degen/quadrature.hpp"

namespace degen {

enum class KernelKind { kRectangular, kTriangular, kEpanechnikov, kQuartic };

/// Symmetric nonnegative kernel supported on [-1, 1] with sup K <= 1.
///
/// The smooth kernels are used unnormalized (peak value 1): only the bound on
/// sup K matters to the estimator, not unit mass. The rectangular kernel is
/// 1/2 on [-1, 1] and is admitted without a Hölder condition.
class Kernel {
 public:
  explicit Kernel(KernelKind kind = KernelKind::kRectangular) : kind_(kind) {
    switch (kind_) {
      case KernelKind::kRectangular:
        holder_ = false;
        holder_rho_ = 0.0;
        holder_kappa_ = 0.0;
        break;
      case KernelKind::kTriangular:
        holder_rho_ = 1.0;
        break;
      case KernelKind::kEpanechnikov:
        holder_rho_ = 2.0;
        break;
      case KernelKind::kQuartic:
        // max |d/dx (1-x^2)^2| = 8 / (3 sqrt 3), at x = 1/sqrt 3
        holder_rho_ = 8.0 / (3.0 * std::sqrt(3.0));
        break;
    }
  }

  static Kernel from_id(std::string_view id) {
    if (id == "rect") return Kernel(KernelKind::kRectangular);
    if (id == "tri") return Kernel(KernelKind::kTriangular);
    if (id == "epan") return Kernel(KernelKind::kEpanechnikov);
    if (id == "quartic") return Kernel(KernelKind::kQuartic);
    throw ConfigError("unknown kernel id '" + std::string(id) + "'");
  }

  KernelKind kind() const { return kind_; }
  std::string id() const {
    switch (kind_) {
      case KernelKind::kRectangular: return "rect";
      case KernelKind::kTriangular: return "tri";
      case KernelKind::kEpanechnikov: return "epan";
      case KernelKind::kQuartic: return "quartic";
    }
    return "?";
  }

  double operator()(double x) const {
    const double a = std::abs(x);
    if (a > 1.0) return 0.0;
    switch (kind_) {
      case KernelKind::kRectangular: return 0.5;
      case KernelKind::kTriangular: return 1.0 - a;
      case KernelKind::kEpanechnikov: return 1.0 - a * a;
      case KernelKind::kQuartic: {
        const double b = 1.0 - a * a;
        return b * b;
      }
    }
    return 0.0;
  }

  /// K_inf = sup K.
  double sup() const { return kind_ == KernelKind::kRectangular ? 0.5 : 1.0; }

  bool holder() const { return holder_; }
  double holder_rho() const { return holder_rho_; }
  double holder_kappa() const { return holder_kappa_; }

  /// int_0^1 y^m K(y) dy for m > -1, in closed form.
  double half_moment(double m) const {
    if (!(m > -1.0)) throw DomainError("Kernel::half_moment: exponent must exceed -1");
    switch (kind_) {
      case KernelKind::kRectangular: return 0.5 / (m + 1.0);
      case KernelKind::kTriangular: return 1.0 / (m + 1.0) - 1.0 / (m + 2.0);
      case KernelKind::kEpanechnikov: return 1.0 / (m + 1.0) - 1.0 / (m + 3.0);
      case KernelKind::kQuartic: return 1.0 / (m + 1.0) - 2.0 / (m + 3.0) + 1.0 / (m + 5.0);
    }
    return 0.0;
  }

  /// Same integral by double-exponential quadrature, which tolerates the
  /// y^m endpoint singularity directly.
  double half_moment_quadrature(double m) const {
    if (!(m > -1.0)) throw DomainError("Kernel::half_moment_quadrature: exponent must exceed -1");
    auto f = [this, m](double y) { return std::pow(y, m) * (*this)(y); };
    return integrate_endpoint_singular(f, 0.0, 1.0, 1e-13).value;
  }

 private:
  KernelKind kind_;
  bool holder_ = true;
  double holder_rho_ = 1.0;
  double holder_kappa_ = 1.0;
};

/// K_{alpha,beta} = (1 + (-1)^alpha) int_0^1 y^(alpha+beta) K(y) dy.
inline double limit_moment(unsigned alpha, double beta, const Kernel& k) {
  if (!(beta > -1.0)) throw DomainError("limit_moment: beta must exceed -1");
  if (alpha % 2 == 1) return 0.0;
  return 2.0 * k.half_moment(static_cast<double>(alpha) + beta);
}

}  // namespace degen
