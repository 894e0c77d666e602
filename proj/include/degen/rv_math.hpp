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
#include <limits>
#include <numbers>
#include <string>

#include "degen/errors.hpp"
#include "degen/quadrature.hpp"

namespace degen {

// ---------------------------------------------------------------------------
// Lambert W
// ---------------------------------------------------------------------------

inline constexpr double kInvE = 0.36787944117144233;  // 1/e
inline constexpr double kBranchSlack = 1e-14;

namespace detail {

inline constexpr int kLambertMaxIter = 64;

// Halley iteration on f(w) = w e^w - x. Used near the branch point and for
// moderate arguments where e^w neither overflows nor underflows.
inline double lambert_halley_direct(double x, double w) {
  for (int it = 0; it < kLambertMaxIter; ++it) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (f == 0.0 || wp1 == 0.0) break;
    const double fp = ew * wp1;
    const double step = f / (fp - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(w))) break;
  }
  return w;
}

// Halley iteration on g(w) = w + log|w| - log|x|, the logarithm of the
// defining identity. Well conditioned in both tails (|w| large).
inline double lambert_halley_log(double log_abs_x, double w) {
  for (int it = 0; it < kLambertMaxIter; ++it) {
    const double g = w + std::log(std::abs(w)) - log_abs_x;
    const double gp = 1.0 + 1.0 / w;
    const double gpp = -1.0 / (w * w);
    const double step = g / (gp - g * gpp / (2.0 * gp));
    w -= step;
    if (std::abs(step) <= 1e-16 * (1.0 + std::abs(w))) break;
  }
  return w;
}

// Series around the branch point -1/e in p = +-sqrt(2 (e x + 1)).
inline double branch_series(double x, double sign) {
  const double q = std::max(0.0, std::fma(std::numbers::e, x, 1.0));
  const double p = sign * std::sqrt(2.0 * q);
  return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0)));
}

}  // namespace detail

/// Principal branch W0: the solution w >= -1 of w e^w = x, for x >= -1/e.
inline double lambert_w0(double x) {
  if (std::isnan(x) || x < -kInvE - kBranchSlack) {
    throw DomainError("lambert_w0: argument below -1/e");
  }
  if (x <= -kInvE) return -1.0;
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;
  if (x < -0.25) return detail::lambert_halley_direct(x, detail::branch_series(x, 1.0));
  if (x <= std::numbers::e) {
    const double l1 = std::log1p(x);
    const double guess = l1 * (1.0 - std::log1p(l1) / (2.0 + l1));
    return detail::lambert_halley_direct(x, guess);
  }
  const double l1 = std::log(x);
  const double l2 = std::log(l1);
  return detail::lambert_halley_log(l1, l1 - l2 + l2 / l1);
}

/// W0(exp(log_x)), usable when exp(log_x) itself would overflow.
inline double lambert_w0_log(double log_x) {
  if (log_x <= 1.0) return lambert_w0(std::exp(log_x));
  const double l2 = std::log(log_x);
  return detail::lambert_halley_log(log_x, log_x - l2 + l2 / log_x);
}

/// Lower branch W-1: the solution w <= -1 of w e^w = x, for -1/e <= x < 0.
inline double lambert_wm1(double x) {
  if (std::isnan(x) || x < -kInvE - kBranchSlack || x >= 0.0) {
    throw DomainError("lambert_wm1: argument outside [-1/e, 0)");
  }
  if (x <= -kInvE) return -1.0;
  if (x < -0.25) return detail::lambert_halley_direct(x, detail::branch_series(x, -1.0));
  const double l1 = std::log(-x);
  const double l2 = std::log(-l1);
  return detail::lambert_halley_log(l1, l1 - l2 + l2 / l1);
}

/// W-1(-exp(log_neg_x)), usable when exp(log_neg_x) would underflow.
inline double lambert_wm1_log(double log_neg_x) {
  if (std::isnan(log_neg_x) || log_neg_x > -1.0 + kBranchSlack) {
    if (log_neg_x <= -1.0 + kBranchSlack) return -1.0;
    throw DomainError("lambert_wm1_log: argument outside [-1/e, 0)");
  }
  if (log_neg_x > std::log(0.25)) return lambert_wm1(-std::exp(log_neg_x));
  const double l2 = std::log(-log_neg_x);
  return detail::lambert_halley_log(log_neg_x, log_neg_x - l2 + l2 / log_neg_x);
}

// ---------------------------------------------------------------------------
// Generalized inverse
// ---------------------------------------------------------------------------

/// Smallest h in [lo, hi] with R(h) >= y, for R nondecreasing and continuous
/// on the bracket. Bisection to relative width `rel_tol`.
template <class Fn>
double generalized_inverse(Fn&& R, double y, double lo, double hi, double rel_tol = 1e-12) {
  if (!(lo <= hi)) throw BracketError("generalized_inverse: empty bracket");
  const double r_lo = R(lo);
  const double r_hi = R(hi);
  if (!(y <= r_hi) || std::isnan(y)) {
    throw BracketError("generalized_inverse: target above R(hi)");
  }
  if (y < r_lo) {
    throw BracketError("generalized_inverse: target below R(lo)");
  }
  if (r_lo >= y) return lo;
  double a = lo;  // R(a) < y
  double b = hi;  // R(b) >= y
  for (int it = 0; it < 4000; ++it) {
    if (b - a <= rel_tol * std::abs(b)) break;
    const double mid = a + 0.5 * (b - a);
    if (mid <= a || mid >= b) break;
    if (R(mid) >= y) {
      b = mid;
    } else {
      a = mid;
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// Power-log inversion
// ---------------------------------------------------------------------------

/// Largest value of h^gamma (log 1/h)^alpha on (0, 1) when alpha > 0,
/// attained at h = exp(-alpha/gamma).
inline double power_log_peak(double gamma, double alpha) {
  return std::exp(-alpha) * std::pow(alpha / gamma, alpha);
}

/// Smallest solution h in (0, 1) of h^gamma (log 1/h)^alpha = x.
///
/// With t = (gamma/alpha) log h the equation becomes t e^t = -gamma x^(1/alpha)
/// / alpha. For alpha > 0 the smallest root is on the W-1 branch and exists
/// only below the peak value; for alpha < 0 the unique root is on W0. All
/// arithmetic on the Lambert argument is done in log space so that small x and
/// small |alpha| do not underflow.
inline double invert_power_log(double gamma, double alpha, double x) {
  if (!(gamma > 0.0)) throw DomainError("invert_power_log: gamma must be positive");
  if (!(x > 0.0)) throw DomainError("invert_power_log: x must be positive");
  if (alpha == 0.0) return std::pow(x, 1.0 / gamma);
  const double log_abs_z = std::log(gamma / std::abs(alpha)) + std::log(x) / alpha;
  double t = 0.0;
  if (alpha > 0.0) {
    if (log_abs_z > -1.0 + kBranchSlack) {
      throw DomainError("invert_power_log: x exceeds the solvable range");
    }
    t = lambert_wm1_log(std::min(log_abs_z, -1.0));
  } else {
    t = lambert_w0_log(log_abs_z);
  }
  return std::exp(alpha * t / gamma);
}

// ---------------------------------------------------------------------------
// Regularly varying and Gamma-varying functions
// ---------------------------------------------------------------------------

/// scale * h^index * (log_offset + log(1/h))^log_power.
///
/// log_offset = 0 gives the canonical (log 1/h)^gamma slow term. Design
/// densities use log_offset = 1 so the slow term stays finite and positive on
/// all of (0, 1].
struct RegVarFn {
  double scale = 1.0;
  double index = 0.0;
  double log_power = 0.0;
  double log_offset = 0.0;

  double slow(double h) const {
    if (log_power == 0.0) return 1.0;
    return std::pow(log_offset - std::log(h), log_power);
  }

  double operator()(double h) const { return scale * std::pow(h, index) * slow(h); }

  double log_value(double h) const {
    double v = std::log(scale) + index * std::log(h);
    if (log_power != 0.0) v += log_power * std::log(log_offset - std::log(h));
    return v;
  }

  /// Upper end of the domain where the slow term is defined.
  double domain_end() const {
    return log_power == 0.0 ? std::numeric_limits<double>::infinity() : std::exp(log_offset);
  }

  bool integrable_at_zero() const {
    return index > -1.0 || (index == -1.0 && log_power < -1.0);
  }

  /// Integral of the function over [0, h], with an absolute error estimate.
  ///
  /// Closed form for pure powers and for index -1; otherwise the substitution
  /// t = h exp(-w/(index+1)) turns the integral into
  /// h^(index+1)/(index+1) int_0^inf e^-w slow(h e^(-w/(index+1))) dw.
  QuadResult primitive(double h) const {
    if (!(h >= 0.0)) throw DomainError("RegVarFn::primitive: negative upper limit");
    if (!integrable_at_zero()) {
      throw DomainError("RegVarFn::primitive: not integrable at zero (index " +
                        std::to_string(index) + ", log power " + std::to_string(log_power) + ")");
    }
    if (h == 0.0) return {0.0, 0.0};
    if (index == -1.0) {
      const double e = log_power + 1.0;
      return {scale * std::pow(log_offset - std::log(h), e) / (-e), 0.0};
    }
    const double a = index + 1.0;
    const double lead = scale * std::pow(h, a) / a;
    if (log_power == 0.0) return {lead, 0.0};
    const double base = log_offset - std::log(h);
    const double lp = log_power;
    auto integrand = [base, a, lp](double w) {
      const double decay = std::exp(-w);
      return decay == 0.0 ? 0.0 : decay * std::pow(base + w / a, lp);
    };
    const QuadResult q = integrate_half_line(integrand);
    return {lead * q.value, lead * q.error};
  }
};

/// exp(-1/h^alpha), Gamma-varying at 0 with auxiliary function h^(alpha+1)/alpha.
struct GammaVarFn {
  double alpha = 1.0;

  double operator()(double h) const { return std::exp(log_value(h)); }
  double log_value(double h) const { return -std::pow(h, -alpha); }
  double aux(double h) const { return std::pow(h, alpha + 1.0) / alpha; }

  /// log of the integral over [0, h], computed without underflow as
  /// -h^-alpha + log aux(h) + log J(h), where
  /// J(h) = int_0^inf e^-s (1 + s h^alpha)^-(1+alpha)/alpha ds lies in (0, 1].
  double log_primitive(double h) const {
    if (!(h > 0.0)) {
      if (h == 0.0) return -std::numeric_limits<double>::infinity();
      throw DomainError("GammaVarFn::log_primitive: negative upper limit");
    }
    const double ha = std::pow(h, alpha);
    const double e = -(1.0 + alpha) / alpha;
    auto integrand = [ha, e](double s) { return std::exp(-s) * std::pow(1.0 + s * ha, e); };
    const QuadResult j = integrate_half_line(integrand);
    return log_value(h) + std::log(aux(h)) + std::log(j.value);
  }

  double primitive(double h) const { return h == 0.0 ? 0.0 : std::exp(log_primitive(h)); }
};

/// Ratio of int_0^h t^gamma ell(t) dt to its Karamata equivalent
/// (1+gamma)^-1 h^(1+gamma) ell(h). Tends to 1 as h -> 0 for gamma > -1.
inline double karamata_ratio_check(const RegVarFn& ell, double gamma, double h) {
  if (!(gamma > -1.0)) throw DomainError("karamata_ratio_check: gamma must exceed -1");
  const RegVarFn integrand{ell.scale, gamma, ell.log_power, ell.log_offset};
  const QuadResult num = integrand.primitive(h);
  return num.value / (std::pow(h, 1.0 + gamma) / (1.0 + gamma) * ell(h));
}

}  // namespace degen
