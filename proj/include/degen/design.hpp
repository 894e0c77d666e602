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
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "degen/errors.hpp"
#include "degen/quadrature.hpp"
#include "degen/rng.hpp"
#include "degen/rv_math.hpp"

namespace degen {

enum class DesignKind { kRegVar, kGammaVar, kExplicit };

namespace detail {

// Monotone inverse of a primitive F on a geometric grid. Nodes carry exact
// values and slopes; lookups start from a cubic Hermite guess in log-log
// coordinates and are polished by safeguarded Newton steps, where F between
// nodes is recovered by a Gauss-Legendre panel integral of the density.
class PrimitiveInverter {
 public:
  PrimitiveInverter(std::function<double(double)> density, double t_min, double t_max,
                    double f_min, double ratio = 1.01)
      : density_(std::move(density)) {
    const auto count = static_cast<std::size_t>(
        std::ceil(std::log(t_max / t_min) / std::log(ratio))) + 1;
    t_.resize(count);
    f_.resize(count);
    slope_.resize(count);
    const double step = std::log(t_max / t_min) / static_cast<double>(count - 1);
    for (std::size_t k = 0; k < count; ++k) {
      t_[k] = (k + 1 == count) ? t_max : t_min * std::exp(step * static_cast<double>(k));
    }
    f_[0] = f_min;
    for (std::size_t k = 1; k < count; ++k) {
      f_[k] = f_[k - 1] + gauss_legendre8(density_, t_[k - 1], t_[k]);
    }
    for (std::size_t k = 0; k < count; ++k) {
      slope_[k] = t_[k] * density_(t_[k]) / f_[k];  // d log F / d log t
    }
  }

  double t_min() const { return t_.front(); }
  double f_min() const { return f_.front(); }
  double t_max() const { return t_.back(); }
  double f_max() const { return f_.back(); }

  /// Primitive value at t inside the grid.
  double value(double t) const {
    const std::size_t k = cell_of_t(t);
    return f_[k] + gauss_legendre8(density_, t_[k], t);
  }

  /// t in [t_min, t_max] with F(t) = y, for f_min <= y <= f_max.
  double invert(double y) const {
    if (y <= f_.front()) return t_.front();
    if (y >= f_.back()) return t_.back();
    const auto it = std::upper_bound(f_.begin(), f_.end(), y);
    const std::size_t k = static_cast<std::size_t>(it - f_.begin()) - 1;
    const double lt0 = std::log(t_[k]);
    const double lt1 = std::log(t_[k + 1]);
    const double lf0 = std::log(f_[k]);
    const double lf1 = std::log(f_[k + 1]);
    const double ly = std::log(y);
    // Hermite interpolation of log t as a function of log F (inverse slopes).
    const double dh = lf1 - lf0;
    const double s = (ly - lf0) / dh;
    const double m0 = dh / slope_[k];
    const double m1 = dh / slope_[k + 1];
    const double s2 = s * s;
    const double s3 = s2 * s;
    double lt = (2 * s3 - 3 * s2 + 1) * lt0 + (s3 - 2 * s2 + s) * m0 +
                (-2 * s3 + 3 * s2) * lt1 + (s3 - s2) * m1;
    double lo = t_[k];
    double hi = t_[k + 1];
    double t = std::clamp(std::exp(lt), lo, hi);
    for (int it_n = 0; it_n < 40; ++it_n) {
      const double g = f_[k] + gauss_legendre8(density_, t_[k], t) - y;
      if (g > 0.0) {
        hi = t;
      } else {
        lo = t;
      }
      const double d = density_(t);
      double next = (d > 0.0) ? t - g / d : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const double rel = std::abs(next - t) / t;
      t = next;
      if (rel < 1e-8 || hi - lo <= 1e-15 * hi) break;
    }
    return t;
  }

 private:
  std::size_t cell_of_t(double t) const {
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    if (it == t_.begin()) return 0;
    return std::min<std::size_t>(static_cast<std::size_t>(it - t_.begin()) - 1, t_.size() - 2);
  }

  std::function<double(double)> density_;
  std::vector<double> t_;
  std::vector<double> f_;
  std::vector<double> slope_;
};

}  // namespace detail

/// Design density on [0, 1] of the form mu(x) = c * nu(|x - x0|).
///
/// Shapes:
///  - RegVar: nu(t) = t^beta (1 + log 1/t)^log_power, beta >= -1 (with
///    log_power < -1 when beta = -1 so nu is integrable at 0);
///  - GammaVar: nu(t) = exp(-1/t^alpha);
///  - Explicit: the primitive F_nu of the local density is given directly and
///    taken as already normalized (c = 1). Explicit designs describe only the
///    neighbourhood of x0 and cannot be sampled.
///
/// The normalizing constant and, when no closed-form inverse exists, the
/// inversion table are built once at construction; the model is immutable
/// afterwards and cheap to copy.
class DesignModel {
 public:
  static DesignModel regvar(double x0, double beta, double log_power = 0.0) {
    check_x0(x0);
    if (!(beta >= -1.0)) throw ConfigError("design: beta must be >= -1");
    DesignModel m;
    m.kind_ = DesignKind::kRegVar;
    m.x0_ = x0;
    m.beta_ = beta;
    m.log_power_ = log_power;
    m.shape_ = RegVarFn{1.0, beta, log_power, 1.0};
    if (!m.shape_.integrable_at_zero()) {
      throw ConfigError("design: nu(t) = t^-1 (1 + log 1/t)^" + std::to_string(log_power) +
                        " is not integrable at 0 (need log_power < -1)");
    }
    m.finish();
    return m;
  }

  static DesignModel gamma_var(double x0, double alpha) {
    check_x0(x0);
    if (!(alpha > 0.0)) throw ConfigError("design: alpha must be positive");
    DesignModel m;
    m.kind_ = DesignKind::kGammaVar;
    m.x0_ = x0;
    m.alpha_ = alpha;
    m.gamma_ = GammaVarFn{alpha};
    m.finish();
    return m;
  }

  /// Local primitive F(h) = h^(beta+1) (log 1/h)^log_power, used verbatim.
  static DesignModel explicit_power_log(double x0, double beta, double log_power) {
    check_x0(x0);
    if (!(beta > -1.0)) throw ConfigError("design: explicit power-log primitive needs beta > -1");
    DesignModel m;
    m.kind_ = DesignKind::kExplicit;
    m.x0_ = x0;
    m.beta_ = beta;
    m.log_power_ = log_power;
    m.power_log_form_ = true;
    // F is increasing only while (beta+1) log(1/h) > log_power, and blows up
    // at h = 1 when log_power < 0.
    double w = 1.0;
    if (log_power > 0.0) w = std::exp(-log_power / (beta + 1.0));
    if (log_power < 0.0) w = std::exp(-1.0);
    m.explicit_window_ = w;
    m.explicit_f_ = [beta, log_power](double h) {
      if (h <= 0.0) return 0.0;
      return std::pow(h, beta + 1.0) * std::pow(-std::log(h), log_power);
    };
    m.norm_const_ = 1.0;
    return m;
  }

  /// Local primitive given as an arbitrary increasing function on [0, window].
  static DesignModel explicit_primitive(double x0, std::function<double(double)> f, double window) {
    check_x0(x0);
    if (!(window > 0.0)) throw ConfigError("design: explicit window must be positive");
    DesignModel m;
    m.kind_ = DesignKind::kExplicit;
    m.x0_ = x0;
    m.explicit_window_ = window;
    m.explicit_f_ = std::move(f);
    m.norm_const_ = 1.0;
    return m;
  }

  DesignKind kind() const { return kind_; }
  double x0() const { return x0_; }
  double beta() const { return beta_; }
  double log_power() const { return log_power_; }
  double alpha() const { return alpha_; }
  bool power_log_form() const { return power_log_form_; }
  double norm_const() const { return norm_const_; }
  bool samplable() const { return kind_ != DesignKind::kExplicit; }

  std::string id() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
      case DesignKind::kRegVar:
        os << "regvar(x0=" << x0_ << ",beta=" << beta_ << ",log_power=" << log_power_ << ")";
        break;
      case DesignKind::kGammaVar:
        os << "gamma(x0=" << x0_ << ",alpha=" << alpha_ << ")";
        break;
      case DesignKind::kExplicit:
        os << "explicit(x0=" << x0_ << ",beta=" << beta_ << ",log_power=" << log_power_ << ")";
        break;
    }
    return os.str();
  }

  /// Half-width of the largest interval around x0 inside [0, 1] on which
  /// the design is symmetric.
  double window() const {
    if (kind_ == DesignKind::kExplicit) return explicit_window_;
    return std::min(x0_, 1.0 - x0_);
  }

  /// Largest distance |X - x0| that carries mass.
  double reach() const {
    if (kind_ == DesignKind::kExplicit) return explicit_window_;
    return std::max(x0_, 1.0 - x0_);
  }

  /// Unnormalized shape nu(t), t > 0.
  double nu(double t) const {
    switch (kind_) {
      case DesignKind::kRegVar: return shape_(t);
      case DesignKind::kGammaVar: return gamma_(t);
      case DesignKind::kExplicit:
        throw DomainError("design: explicit models carry no density");
    }
    return 0.0;
  }

  /// Unnormalized primitive F_nu(h) = int_0^h nu(t) dt. For explicit models
  /// this is the supplied primitive.
  double f_nu(double h) const {
    if (!(h >= 0.0)) throw DomainError("f_nu: negative argument");
    if (h == 0.0) return 0.0;
    if (inverter_ && h >= inverter_->t_min() && h <= inverter_->t_max()) {
      return inverter_->value(h);
    }
    switch (kind_) {
      case DesignKind::kRegVar: return shape_.primitive(h).value;
      case DesignKind::kGammaVar: return gamma_.primitive(h);
      case DesignKind::kExplicit: return explicit_f_(h);
    }
    return 0.0;
  }

  /// log F_nu(h); finite for Gamma-varying shapes long after F_nu underflows.
  double log_f_nu(double h) const {
    if (kind_ == DesignKind::kGammaVar) return gamma_.log_primitive(h);
    return std::log(f_nu(h));
  }

  /// P(|X - x0| <= h). Equals 2 c F_nu(h) inside the symmetric window.
  double local_mass(double h) const {
    if (h <= 0.0) return 0.0;
    if (kind_ == DesignKind::kExplicit) return 2.0 * explicit_f_(std::min(h, explicit_window_));
    const double a = window();
    const double b = reach();
    return std::min(1.0, norm_const_ * (f_nu(std::min(h, a)) + f_nu(std::min(h, b))));
  }

  double log_local_mass(double h) const {
    if (kind_ == DesignKind::kGammaVar && h <= window()) {
      return std::log(2.0 * norm_const_) + gamma_.log_primitive(h);
    }
    return std::log(local_mass(h));
  }

  /// P(X <= x).
  double cdf(double x) const {
    require_samplable("cdf");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double d = x - x0_;
    const double left = (x0_ <= 0.5) ? f_window_ : f_nu(x0_);
    if (d <= 0.0) return std::clamp(norm_const_ * (left - f_nu(-d)), 0.0, 1.0);
    return std::clamp(norm_const_ * (left + f_nu(d)), 0.0, 1.0);
  }

  /// Distance t = |X - x0| with P(|X - x0| <= t) = u.
  double distance_quantile(double u) const {
    require_samplable("distance_quantile");
    const double a = window();
    const double fa = f_window_;
    if (u < 2.0 * norm_const_ * fa) return std::min(f_inverse(u / (2.0 * norm_const_)), a);
    return std::clamp(f_inverse(u / norm_const_ - fa), a, reach());
  }

  /// Point in [0, 1] from a distance variate u and an independent sign variate.
  double quantile_point(double u_distance, double u_sign) const {
    const double t = distance_quantile(u_distance);
    const double a = window();
    double sign = 1.0;
    if (t <= a && a > 0.0) {
      sign = (u_sign < 0.5) ? -1.0 : 1.0;
    } else {
      sign = (x0_ <= 0.5) ? 1.0 : -1.0;
    }
    return std::clamp(x0_ + sign * t, 0.0, 1.0);
  }

  /// y -> t with F_nu(t) = y.
  double f_inverse(double y) const {
    if (y <= 0.0) return 0.0;
    if (kind_ == DesignKind::kRegVar && log_power_ == 0.0) {
      return std::pow((beta_ + 1.0) * y, 1.0 / (beta_ + 1.0));
    }
    if (kind_ == DesignKind::kRegVar && beta_ == -1.0) {
      const double e = log_power_ + 1.0;  // < 0
      return std::exp(1.0 - std::pow(-e * y, 1.0 / e));
    }
    if (!inverter_) throw DomainError("f_inverse: no inverse available");
    if (y < inverter_->f_min()) {
      if (kind_ == DesignKind::kRegVar) {
        return inverter_->t_min() * std::pow(y / inverter_->f_min(), 1.0 / (beta_ + 1.0));
      }
      const double ly = std::log(y);
      return generalized_inverse([this](double h) { return gamma_.log_primitive(h); }, ly,
                                 0.0, inverter_->t_min());
    }
    return inverter_->invert(y);
  }

 private:
  DesignModel() = default;

  static void check_x0(double x0) {
    if (!(x0 >= 0.0 && x0 <= 1.0)) throw ConfigError("design: x0 must lie in [0, 1]");
  }

  void require_samplable(const char* what) const {
    if (!samplable()) {
      throw DomainError(std::string(what) + ": explicit designs describe only a neighbourhood of x0");
    }
  }

  void finish() {
    f_window_ = f_nu(window());
    const double total = f_nu(x0_) + f_nu(1.0 - x0_);
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw ConfigError("design: density is not normalizable on [0, 1]");
    }
    norm_const_ = 1.0 / total;
    const bool closed = kind_ == DesignKind::kRegVar && (log_power_ == 0.0 || beta_ == -1.0);
    if (closed) return;
    const double t_max = reach();
    if (kind_ == DesignKind::kRegVar) {
      const double t_min = 1e-14;
      const RegVarFn s = shape_;
      inverter_ = std::make_shared<const detail::PrimitiveInverter>(
          [s](double t) { return s(t); }, t_min, t_max, s.primitive(t_min).value);
    } else {
      // Below t_min the mass is under 1e-280: unreachable by 53-bit uniforms.
      const double t_min = std::pow(650.0, -1.0 / alpha_);
      const GammaVarFn g = gamma_;
      inverter_ = std::make_shared<const detail::PrimitiveInverter>(
          [g](double t) { return g(t); }, t_min, t_max, g.primitive(t_min));
    }
  }

  DesignKind kind_ = DesignKind::kRegVar;
  double x0_ = 0.5;
  double beta_ = 0.0;
  double log_power_ = 0.0;
  double alpha_ = 0.0;
  double norm_const_ = 1.0;
  double f_window_ = 0.0;  // F_nu at the symmetric half-width
  bool power_log_form_ = false;
  RegVarFn shape_{};
  GammaVarFn gamma_{};
  double explicit_window_ = 0.0;
  std::function<double(double)> explicit_f_;
  std::shared_ptr<const detail::PrimitiveInverter> inverter_;
};

/// Draws X_1..X_n for one replication.
struct DesignSample {
  std::vector<double> xs;
  std::uint64_t seed = 0;
  std::string model_id;
};

/// c with c * int_0^1 nu(|x - x0|) dx = 1.
inline double normalize(const DesignModel& model) { return model.norm_const(); }

inline double cdf(const DesignModel& model, double x) { return model.cdf(x); }

inline double f_nu(const DesignModel& model, double h) { return model.f_nu(h); }

/// n independent draws by inverse CDF; a pure function of (model, n, seed).
inline DesignSample sample(const DesignModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("sample: n must be at least 1");
  DesignSample s;
  s.seed = seed;
  s.model_id = model.id();
  s.xs.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.xs[i] = model.quantile_point(uniform01(seed, Stream::kDistance, i),
                                   uniform01(seed, Stream::kSign, i));
  }
  return s;
}

}  // namespace degen
