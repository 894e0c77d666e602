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


#include "degen/rates.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/special_functions/lambert_w.hpp>

#include "degen/design.hpp"
#include "degen/kernels.hpp"
#include "degen/modulus.hpp"
#include "degen/rng.hpp"
#include "gtest/gtest.h"

namespace degen {
namespace {

// Solves h^D (log 1/h)^b = x for the smallest root. With L = log 1/h and
// z = -D L / b the equation reads z e^z = -(D/b) x^(1/b), which goes to
// Boost's Lambert W; when that argument leaves the double range the
// contraction L = (log 1/x + b log L) / D is iterated instead.
double power_log_root(double dd, double b, double x) {
  if (b == 0.0) return std::pow(x, 1.0 / dd);
  const double arg = -(dd / b) * std::pow(x, 1.0 / b);
  if (std::isnormal(arg) && std::isfinite(arg)) {
    const double z = b > 0.0 ? boost::math::lambert_wm1(arg) : boost::math::lambert_w0(arg);
    return std::exp(z * b / dd);
  }
  double big_l = -std::log(x) / dd;
  for (int i = 0; i < 500; ++i) big_l = (-std::log(x) + b * std::log(big_l)) / dd;
  return std::exp(-big_l);
}

TEST(SolveHn, UniformDesignExample) {
  const auto d = DesignModel::regvar(0.5, 0.0);
  const Modulus w{1.0, 1.0, 0.0};
  // 2 h^3 n = 1 with n = 500.
  EXPECT_NEAR(solve_hn(w, d, 500.0, 1.0), 0.1, 1e-14);
  EXPECT_LT(rate_residual(w, d, 500.0, 1.0, solve_hn(w, d, 500.0, 1.0)), 1e-12);
}

TEST(SolveHn, EightfoldSampleHalvesBandwidth) {
  const auto d = DesignModel::regvar(0.5, 0.0);
  const Modulus w{1.0, 1.0, 0.0};
  for (double n : {1e3, 1e5, 1e8}) {
    EXPECT_NEAR(solve_hn(w, d, 8.0 * n, 1.0), 0.5 * solve_hn(w, d, n, 1.0), 1e-12 * solve_hn(w, d, n, 1.0));
  }
}

TEST(SolveHn, DependsOnNoiseThroughNOverSigmaSquared) {
  for (const auto& d : {DesignModel::regvar(0.3, 1.0, 1.0), DesignModel::gamma_var(0.5, 1.0),
                        DesignModel::regvar(0.5, -1.0, -2.0)}) {
    const Modulus w{1.5, 1.0, 0.5};
    for (double sigma : {0.1, 2.0}) {
      const double a = solve_hn(w, d, 1e6, sigma);
      const double b = solve_hn(w, d, 1e6 / (sigma * sigma), 1.0);
      EXPECT_NEAR(a, b, 1e-10 * a) << d.id();
      EXPECT_LT(rate_residual(w, d, 1e6, sigma, a), 1e-10) << d.id();
    }
  }
}

TEST(SolveHn, DecreasesInN) {
  const auto d = DesignModel::regvar(0.5, 0.5, 1.0);
  const Modulus w{1.0, 2.0, 0.0};
  double prev = 2.0;
  for (double n = 1e3; n < 1e13; n *= 10.0) {
    const double h = solve_hn(w, d, n, 1.0);
    EXPECT_LT(h, prev);
    prev = h;
  }
}

TEST(SolveHn, ExplicitPowerLogMatchesLambertRoot) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u;
  for (int trial = 0; trial < 50; ++trial) {
    const double beta = -0.9 + 2.9 * u(rng);
    const double lp = trial % 3 == 0 ? 0.0 : -1.5 + 3.0 * u(rng);
    const double s = 0.3 + 2.7 * u(rng);
    const double gamma = trial % 2 == 0 ? 0.0 : -1.0 + 2.0 * u(rng);
    const double r = 0.5 + 2.0 * u(rng);
    const double sigma = 0.2 + 2.0 * u(rng);
    const double n = std::pow(10.0, 4.0 + 6.0 * u(rng));
    const auto d = DesignModel::explicit_power_log(0.5, beta, lp);
    const Modulus w{r, s, gamma};
    const double dd = 1.0 + 2.0 * s + beta;
    const double expect = power_log_root(dd, lp + 2.0 * gamma, sigma * sigma / (2.0 * r * r * n));
    ASSERT_LT(expect, std::min(d.window(), w.h_max()));
    EXPECT_NEAR(solve_hn(w, d, n, sigma), expect, 1e-10 * expect) << trial;
  }
}

TEST(SolveHn, Errors) {
  const auto d = DesignModel::regvar(0.5, 0.0);
  EXPECT_THROW(solve_hn(Modulus{1.0, 1.0, 0.0}, d, 1.0, 100.0), NoSolutionError);
  EXPECT_THROW(solve_hn(Modulus{1.0, 1.0, 0.0}, d, 0.5, 1.0), ConfigError);
  EXPECT_THROW(solve_hn(Modulus{1.0, 1.0, 0.0}, d, 10.0, 0.0), ConfigError);
  EXPECT_THROW(solve_hn(Modulus{-1.0, 1.0, 0.0}, d, 10.0, 1.0), ConfigError);
}

struct Family {
  DesignModel design;
  Modulus modulus;
};

std::vector<Family> families() {
  return {
      {DesignModel::regvar(0.5, 0.0), Modulus{1.0, 1.0, 0.0}},
      {DesignModel::regvar(0.5, 1.0), Modulus{1.0, 2.0, 0.0}},
      {DesignModel::regvar(0.5, -0.5), Modulus{2.0, 0.5, 0.0}},
      {DesignModel::regvar(0.3, 1.0, 1.0), Modulus{1.0, 1.0, 0.0}},
      {DesignModel::regvar(0.5, 0.0, -1.0), Modulus{1.0, 1.0, 0.5}},
      {DesignModel::regvar(0.5, 0.5), Modulus{1.0, 1.0, -0.5}},
      {DesignModel::regvar(0.5, -1.0, -2.0), Modulus{1.0, 1.0, 0.0}},
      {DesignModel::regvar(0.5, -1.0, -3.0), Modulus{1.0, 2.0, 0.0}},
      {DesignModel::gamma_var(0.5, 1.0), Modulus{1.0, 1.0, 0.0}},
      {DesignModel::gamma_var(0.5, 2.0), Modulus{1.0, 1.0, 0.0}},
      {DesignModel::gamma_var(0.4, 0.5), Modulus{1.0, 2.0, 0.0}},
      {DesignModel::explicit_power_log(0.5, 0.5, 1.0), Modulus{1.0, 1.5, 0.0}},
  };
}

TEST(AsymptoticRate, ClosedFormRatioConverges) {
  for (const Family& f : families()) {
    double prev_gap = INFINITY;
    for (double n = 1e3; n <= 1e12 * 1.01; n *= 1e3) {
      const RateReport rep = asymptotic_rate(f.modulus, f.design, n, 1.0);
      ASSERT_TRUE(rep.closed_form.has_value());
      const double gap = std::abs(rep.r_n / *rep.closed_form - 1.0);
      EXPECT_LE(gap, prev_gap + 1e-12) << f.design.id() << " n=" << n;
      prev_gap = gap;
    }
    EXPECT_LE(prev_gap, 0.15) << f.design.id();
  }
}

TEST(AsymptoticRate, ExponentMatchesLogLogSlope) {
  for (const Family& f : families()) {
    if (f.design.kind() == DesignKind::kGammaVar) continue;
    const RateReport a = asymptotic_rate(f.modulus, f.design, 1e10, 1.0);
    const double expected = -f.modulus.s / (1.0 + 2.0 * f.modulus.s + f.design.beta());
    EXPECT_NEAR(a.exponent, expected, 1e-15);
    // Slow factors bend the slope; pure powers give it exactly.
    if (f.design.log_power() != 0.0 || f.modulus.log_power != 0.0) continue;
    const RateReport b = asymptotic_rate(f.modulus, f.design, 1e12, 1.0);
    EXPECT_NEAR(std::log(b.r_n / a.r_n) / std::log(100.0), expected, 1e-9) << f.design.id();
  }
}

TEST(AsymptoticRate, LeadingOrderCapturesSlowVariation) {
  // r_n / leading_order tends to a constant: the ratio barely moves between
  // n = 1e10 and n = 1e12.
  for (const Family& f : families()) {
    if (f.design.kind() == DesignKind::kGammaVar) continue;
    const RateReport a = asymptotic_rate(f.modulus, f.design, 1e10, 1.0);
    const RateReport b = asymptotic_rate(f.modulus, f.design, 1e12, 1.0);
    const double drift = (b.r_n / *b.leading_order) / (a.r_n / *a.leading_order);
    EXPECT_NEAR(drift, 1.0, 0.03) << f.design.id();
  }
}

TEST(AsymptoticRate, GammaVariationIsLogarithmic) {
  const auto d = DesignModel::gamma_var(0.5, 1.0);
  const Modulus w{1.0, 1.0, 0.0};
  const RateReport rep = asymptotic_rate(w, d, 1e8, 1.0);
  EXPECT_EQ(rep.exponent, 0.0);
  EXPECT_EQ(rep.regime, Regime::kGammaVar);
  EXPECT_NEAR(*rep.leading_order, 1.0 / std::log(1e8), 1e-15);
  // The gap to the leading order closes like log log n / log n.
  const double lo = asymptotic_rate(w, d, 1e4, 1.0).r_n * std::log(1e4);
  const double hi = asymptotic_rate(w, d, 1e12, 1.0).r_n * std::log(1e12);
  EXPECT_LT(std::abs(hi - 1.0), std::abs(lo - 1.0));
}

TEST(AsymptoticRate, LabelsAndConstants) {
  const RateReport a = asymptotic_rate(Modulus{1.0, 1.0, 0.0}, DesignModel::regvar(0.5, 0.0), 1e4, 1.0);
  EXPECT_EQ(a.regime, Regime::kRegVar);
  EXPECT_NEAR(*a.quarter_noise_constant, std::pow(4.0, 1.0 / 3.0), 1e-15);
  EXPECT_NEAR(a.exponent, -1.0 / 3.0, 1e-15);
  const RateReport b = asymptotic_rate(Modulus{1.0, 1.0, 0.0}, DesignModel::regvar(0.5, -1.0, -2.0), 1e4, 1.0);
  EXPECT_EQ(b.regime, Regime::kBoundaryBeta);
  EXPECT_NEAR(b.exponent, -0.5, 1e-15);
  const auto custom = DesignModel::explicit_primitive(0.5, [](double h) { return h * h; }, 0.5);
  const RateReport c = asymptotic_rate(Modulus{1.0, 1.0, 0.0}, custom, 1e4, 1.0);
  EXPECT_EQ(c.regime, Regime::kExplicit);
  EXPECT_TRUE(std::isnan(c.exponent));
  EXPECT_FALSE(c.closed_form.has_value());
  EXPECT_NEAR(c.h_n, std::pow(0.5e-4, 0.25), 1e-12);
}

TEST(LimitMatrix, RectangularValues) {
  const Kernel rect = Kernel::from_id("rect");
  EXPECT_NEAR(limit_matrix_lambda(0.0, rect, 0), 0.5, 1e-12);
  EXPECT_NEAR(limit_matrix_lambda(0.0, rect, 1), 1.0 / 6.0, 1e-12);
}

TEST(LimitMatrix, PositiveAndContinuousInBeta) {
  for (const char* id : {"rect", "tri", "epan", "quartic"}) {
    const Kernel k = Kernel::from_id(id);
    for (unsigned deg = 0; deg <= 3; ++deg) {
      for (double beta : {-0.9, -0.5, 0.0, 1.0, 3.0}) {
        const double lam = limit_matrix_lambda(beta, k, deg);
        EXPECT_GT(lam, 0.0) << id << deg << beta;
        EXPECT_NEAR(limit_matrix_lambda(beta + 1e-6, k, deg), lam, 1e-4 * lam) << id << deg << beta;
      }
    }
  }
  EXPECT_THROW(limit_matrix_lambda(-1.0, Kernel::from_id("rect"), 0), DomainError);
}

TEST(MConstant, ClosedForms) {
  const double c = std::sqrt(2.0 / std::numbers::pi);
  EXPECT_NEAR(m_constant(1e-12), 1.0, 1e-10);
  EXPECT_NEAR(m_constant(1.0), 1.0 + c, 1e-12);
  EXPECT_NEAR(m_constant(2.0), 2.0 + 2.0 * c, 1e-12);
  EXPECT_THROW(m_constant(0.0), DomainError);
}

TEST(MConstant, MonteCarlo) {
  const double p = 1.5;
  double sum = 0.0;
  double sum_sq = 0.0;
  const std::size_t count = 10000000;
  for (std::size_t i = 0; i < count; ++i) {
    const double v = std::pow(1.0 + std::abs(standard_normal(99, Stream::kNoise, i)), p);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / count;
  const double se = std::sqrt((sum_sq / count - mean * mean) / count);
  EXPECT_NEAR(m_constant(p), mean, 4.0 * se);
}

TEST(Certificate, UniformDesignKl) {
  const LowerBoundCertificate c =
      lower_bound_certificate(Modulus{1.0, 1.0, 0.0}, DesignModel::regvar(0.5, 0.0), 1e4, 1.0, 2.0);
  EXPECT_NEAR(c.kl, 1.0 / 6.0, 1e-9);
  EXPECT_EQ(c.separation, c.r_n);
  EXPECT_NEAR(c.bound_value, c.constant * c.r_n, 1e-15);
}

TEST(Certificate, KlNeverExceedsOneHalf) {
  for (const Family& f : families()) {
    for (double n : {1e2, 1e5, 1e9}) {
      const LowerBoundCertificate c = lower_bound_certificate(f.modulus, f.design, n, 0.7, 1.0);
      EXPECT_LE(c.kl, 0.5 + 1e-9) << f.design.id();
      EXPECT_GT(c.kl, 0.0) << f.design.id();
    }
  }
}

TEST(Certificate, Constant) {
  for (double p : {0.5, 1.0, 2.0, 3.0}) {
    for (double q : {0.1, 0.5, 1.5}) {
      const double inner = std::max(std::exp(-q), 0.5 * (1.0 - std::sqrt(q / 2.0)));
      EXPECT_NEAR(lower_bound_constant(0.5, q, p), 0.5 * std::pow(inner / 2.0, 1.0 / p), 1e-15);
    }
  }
  EXPECT_NEAR(lower_bound_constant(0.5, 0.5, 1.0), 0.25 * std::exp(-0.5), 1e-15);
}

TEST(Certificate, MatchesRiemannSum) {
  // Design density 2 c t for beta = 1 at x0 = 0.5, c = 4.
  const Modulus w{1.0, 1.5, 0.0};
  const double n = 5e3;
  const double sigma = 0.8;
  const LowerBoundCertificate c = lower_bound_certificate(w, DesignModel::regvar(0.5, 1.0), n, sigma, 2.0);
  const int m = 1000000;
  const double dt = c.h_n / m;
  double sum = 0.0;
  for (int i = 0; i < m; ++i) {
    const double t = (i + 0.5) * dt;
    const double gap = c.r_n - w(t);
    sum += gap * gap * 8.0 * t * dt;
  }
  EXPECT_NEAR(c.kl, n / (2.0 * sigma * sigma) * sum, 1e-6 * c.kl);
}

}  // namespace
}  // namespace degen
