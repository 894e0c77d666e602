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
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "degen/design.hpp"
#include "degen/errors.hpp"
#include "degen/kernels.hpp"
#include "degen/linalg.hpp"
#include "degen/modulus.hpp"
#include "degen/quadrature.hpp"
#include "degen/rv_math.hpp"

namespace degen {

enum class Regime { kRegVar, kBoundaryBeta, kGammaVar, kExplicit };

inline std::string regime_name(Regime r) {
  switch (r) {
    case Regime::kRegVar: return "RegVar";
    case Regime::kBoundaryBeta: return "BoundaryBeta";
    case Regime::kGammaVar: return "GammaVar";
    case Regime::kExplicit: return "Explicit";
  }
  return "?";
}

/// Bandwidth h_n and rate r_n = omega(h_n) at sample size n, with the
/// asymptotic equivalent when the design family admits one.
struct RateReport {
  double n = 0.0;
  double h_n = 0.0;
  double r_n = 0.0;
  double exponent = 0.0;
  std::string slow_desc;
  std::optional<double> closed_form;    // equivalent of r_n including constants
  std::optional<double> leading_order;  // same without the multiplicative constant
  std::optional<double> quarter_noise_constant;  // r_n ratio when sigma^2/n becomes sigma^2/(4n)
  Regime regime = Regime::kRegVar;
  std::string regime_label;
};

namespace detail {

/// log of n M(h) omega(h)^2 / sigma^2; zero at the bandwidth.
inline double rate_log_residual(const Modulus& w, const DesignModel& d, double n, double sigma,
                                double h) {
  return 2.0 * std::log(w(h)) + std::log(n) + d.log_local_mass(h) - 2.0 * std::log(sigma);
}

}  // namespace detail

/// Smallest h with omega(h) sqrt(n P(|X - x0| <= h)) >= sigma. Inside the
/// symmetric window the mass equals 2 c F_nu(h).
inline double solve_hn(const Modulus& modulus, const DesignModel& design, double n, double sigma) {
  modulus.validate();
  if (!(n >= 1.0)) throw ConfigError("solve_hn: n must be at least 1");
  if (!(sigma > 0.0)) throw ConfigError("solve_hn: sigma must be positive");
  const double hi0 = design.reach();
  auto g = [&](double h) { return detail::rate_log_residual(modulus, design, n, sigma, h); };
  if (!(hi0 > 0.0) || !(g(hi0) >= 0.0)) {
    throw NoSolutionError("solve_hn: no bandwidth up to " + std::to_string(hi0) +
                          " balances bias and noise at n = " + std::to_string(n));
  }
  double lo = std::min(1e-15, 0.5 * hi0);
  while (g(lo) >= 0.0) {
    lo *= 1e-10;
    if (lo < 1e-290) return lo;
  }
  double hi = hi0;
  for (int it = 0; it < 400 && hi > lo * (1.0 + 4e-16); ++it) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    if (g(mid) >= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

/// Relative residual |omega(h) sqrt(n M(h)) - sigma| / sigma.
inline double rate_residual(const Modulus& modulus, const DesignModel& design, double n,
                            double sigma, double h) {
  return std::abs(std::exp(0.5 * detail::rate_log_residual(modulus, design, n, sigma, h)) - 1.0);
}

/// Exact h_n and r_n together with the asymptotic equivalent.
///
/// Regularly varying families with M(h) ~ 2 A h^(beta+1) (1 + log 1/h)^a
/// reduce to h^D L^b = x with D = 1 + 2s + beta, b = a + 2 gamma and
/// x = sigma^2 / (2 A r^2 n); the equivalent replaces L by one fixed-point
/// step started from log(1/x) / D.
/// Gamma-varying designs are solved through the W0 branch of Lambert's
/// function after dropping the slowly varying factors.
inline RateReport asymptotic_rate(const Modulus& modulus, const DesignModel& design, double n,
                                  double sigma) {
  RateReport rep;
  rep.n = n;
  rep.h_n = solve_hn(modulus, design, n, sigma);
  rep.r_n = modulus(rep.h_n);
  const double s = modulus.s;
  const double r = modulus.r;
  const double gamma = modulus.log_power;
  const double log_n = std::log(n);
  std::ostringstream label;
  label.precision(17);

  if (design.kind() == DesignKind::kGammaVar) {
    const double alpha = design.alpha();
    rep.regime = Regime::kGammaVar;
    label << "GammaVar(alpha=" << alpha << ")";
    rep.exponent = 0.0;
    const double dp = 1.0 + 2.0 * s + alpha;
    const double log_y = std::log(sigma * sigma * alpha / (2.0 * design.norm_const() * r * r * n));
    // v e^v = (alpha/D') y^(-alpha/D')
    const double v = lambert_w0_log(std::log(alpha / dp) - alpha / dp * log_y);
    const double h_eq = std::pow(dp / alpha * v, -1.0 / alpha);
    rep.closed_form = modulus.raw(h_eq);
    rep.leading_order = r * std::pow(log_n, -s / alpha);
    std::ostringstream d;
    d << "(log n)^(" << -s / alpha << ")";
    rep.slow_desc = d.str();
  } else if (design.kind() == DesignKind::kExplicit && !design.power_log_form()) {
    rep.regime = Regime::kExplicit;
    label << "Explicit";
    rep.exponent = std::numeric_limits<double>::quiet_NaN();
    rep.slow_desc = "unavailable";
  } else {
    const double beta = design.beta();
    const double lp = design.log_power();
    double a_const = 1.0;  // M(h) ~ 2 A h^(beta+1) L^a
    double a_pow = lp;
    double offset = 1.0;
    if (design.kind() == DesignKind::kExplicit) {
      offset = 0.0;
    } else if (beta == -1.0) {
      a_const = design.norm_const() / (-(lp + 1.0));
      a_pow = lp + 1.0;
    } else {
      a_const = design.norm_const() / (beta + 1.0);
    }
    rep.regime = (beta == -1.0) ? Regime::kBoundaryBeta : Regime::kRegVar;
    label << (beta == -1.0 ? "BoundaryBeta(" : "RegVar(") << "beta=" << beta << ")";
    const double dd = 1.0 + 2.0 * s + beta;
    const double b = a_pow + 2.0 * gamma;
    rep.exponent = -s / dd;
    const double log_x = std::log(sigma * sigma / (2.0 * a_const * r * r * n));
    // One fixed-point step on L = (log 1/x + a log(offset + L) + 2 gamma log L) / D.
    const double l0 = -log_x / dd;
    double big_l = l0;
    if (l0 > 0.0 && offset + l0 > 0.0) {
      big_l = l0 + (a_pow * std::log(offset + l0) + 2.0 * gamma * std::log(l0)) / dd;
      if (!(big_l > 0.0)) big_l = l0;
    }
    const double h_eq = std::exp(log_x / dd) * std::pow(offset + big_l, -a_pow / dd) *
                        std::pow(big_l, -2.0 * gamma / dd);
    rep.closed_form = r * std::pow(h_eq, s) * std::pow(big_l, gamma);
    rep.leading_order = std::pow(sigma, 2.0 * s / dd) * std::pow(r, (beta + 1.0) / dd) *
                        std::pow(n * std::pow(log_n, a_pow - gamma * (1.0 + beta) / s), -s / dd);
    rep.quarter_noise_constant = std::pow(4.0, s / dd);
    std::ostringstream d;
    d << "n^(" << rep.exponent << ")";
    if (b != 0.0 || gamma != 0.0) {
      d << " (log n)^(" << -(s / dd) * (a_pow - gamma * (1.0 + beta) / s) << ")";
    }
    rep.slow_desc = d.str();
  }
  rep.regime_label = label.str();
  return rep;
}

/// Smallest eigenvalue of the limit matrix with entries
/// (beta+1)/2 K_{j+l,beta}, 0 <= j, l <= k.
inline double limit_matrix_lambda(double beta, const Kernel& kernel, unsigned k) {
  if (!(beta > -1.0)) throw DomainError("limit_matrix_lambda: beta must exceed -1");
  if (k + 1 > kMaxJacobiDim) throw DomainError("limit_matrix_lambda: degree too large");
  SquareMatrix m(k + 1);
  for (unsigned j = 0; j <= k; ++j) {
    for (unsigned l = 0; l <= k; ++l) m(j, l) = 0.5 * (beta + 1.0) * limit_moment(j + l, beta, kernel);
  }
  return smallest_eigenvalue(m);
}

/// sqrt(2/pi) int_0^inf (1 + t)^p exp(-t^2/2) dt.
inline double m_constant(double p) {
  if (!(p > 0.0)) throw DomainError("m_constant: p must be positive");
  auto f = [p](double t) { return std::pow(1.0 + t, p) * std::exp(-0.5 * t * t); };
  return std::sqrt(2.0 / std::numbers::pi) * integrate(f, 0.0, 40.0, 1e-13).value;
}

struct LowerBoundCertificate {
  double h_n = 0.0;
  double r_n = 0.0;
  double kl = 0.0;
  double separation = 0.0;
  double constant = 0.0;  // C(c, Q, p)
  double q = 0.5;
  double c = 0.5;
  double bound_value = 0.0;
};

/// C(c, Q, p) = c 2^(-1/p) max(e^-Q, (1 - sqrt(Q/2))/2)^(1/p).
inline double lower_bound_constant(double c, double q, double p) {
  const double inner = std::max(std::exp(-q), 0.5 * (1.0 - std::sqrt(q / 2.0)));
  return c / std::pow(2.0, 1.0 / p) * std::pow(inner, 1.0 / p);
}

/// Two-point certificate built on f0 = omega(h_n) 1{|x - x0| <= h_n} and
/// f1 = omega(|x - x0|) 1{|x - x0| <= h_n}.
inline LowerBoundCertificate lower_bound_certificate(const Modulus& modulus,
                                                     const DesignModel& design, double n,
                                                     double sigma, double p, double c = 0.5) {
  if (!(p > 0.0)) throw ConfigError("lower_bound_certificate: p must be positive");
  LowerBoundCertificate cert;
  cert.c = c;
  cert.h_n = solve_hn(modulus, design, n, sigma);
  const double top = modulus(cert.h_n);
  cert.r_n = top;
  cert.separation = top;
  // int_0^h (top - omega)^2 dM = int_0^h 2 (top - omega) omega' M dt. The
  // substitution t = h v^(1/s) absorbs the t^(s-1) factor of omega'.
  const double h = std::min(cert.h_n, modulus.h_max());
  const double s = modulus.s;
  auto integrand = [&](double v) {
    const double t = h * std::pow(v, 1.0 / s);
    if (t <= 0.0) return 0.0;
    const double jac = h / s * std::pow(v, 1.0 / s - 1.0);
    return 2.0 * (top - modulus.raw(t)) * modulus.derivative(t) * design.local_mass(t) * jac;
  };
  // M(t) decays only like a power of 1/log(1/t) when beta = -1.
  const double l2 = integrate_endpoint_singular(integrand, 0.0, 1.0, 1e-10).value;
  cert.kl = n / (2.0 * sigma * sigma) * l2;
  cert.constant = lower_bound_constant(c, cert.q, p);
  cert.bound_value = cert.constant * cert.r_n;
  return cert;
}

}  // namespace degen
