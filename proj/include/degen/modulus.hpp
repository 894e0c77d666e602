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
#include <string>

#include "degen/errors.hpp"
#include "degen/rv_math.hpp"

namespace degen {

/// omega(h) = r h^s (log 1/h)^gamma.
///
/// For gamma > 0 the raw expression peaks at h = exp(-gamma/s) and then
/// falls back to 0 at h = 1; eval() holds it at the peak value beyond that
/// point so that the modulus is nondecreasing on all of (0, 1].
struct Modulus {
  double r = 1.0;
  double s = 1.0;
  double log_power = 0.0;

  void validate() const {
    if (!(r > 0.0) || !std::isfinite(r)) throw ConfigError("modulus: r must be positive");
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("modulus: s must be positive");
    if (!std::isfinite(log_power)) throw ConfigError("modulus: log_power must be finite");
  }

  /// Local polynomial degree: the largest integer strictly below s.
  unsigned degree() const {
    return static_cast<unsigned>(std::ceil(s) - 1.0);
  }

  /// End of the range on which the raw expression increases.
  double h_max() const { return log_power > 0.0 ? std::exp(-log_power / s) : 1.0; }

  double raw(double h) const {
    if (h <= 0.0) return 0.0;
    double v = r * std::pow(h, s);
    if (log_power != 0.0) v *= std::pow(0.0 - std::log(h), log_power);  // +0 at h = 1
    return v;
  }

  double operator()(double h) const { return raw(std::min(h, h_max())); }

  /// d omega / dh on (0, h_max).
  double derivative(double h) const {
    if (log_power == 0.0) return r * s * std::pow(h, s - 1.0);
    const double l = -std::log(h);
    return r * std::pow(h, s - 1.0) * std::pow(l, log_power) * (s - log_power / l);
  }

  /// Smallest h with omega(h) >= y; +infinity when no h <= h_max() qualifies.
  double inverse(double y) const {
    if (y <= 0.0) return 0.0;
    const double hm = h_max();
    if (log_power > 0.0) {
      if (y > raw(hm)) return std::numeric_limits<double>::infinity();
      if (y == raw(hm)) return hm;
    }
    double h = 0.0;
    if (log_power == 0.0) {
      h = std::pow(y / r, 1.0 / s);
    } else {
      try {
        h = invert_power_log(s, log_power, y / r);
      } catch (const DomainError&) {
        return hm;  // y within roundoff of the peak
      }
    }
    return (h > hm) ? std::numeric_limits<double>::infinity() : h;
  }

  std::string describe() const {
    std::string d = std::to_string(r) + " h^" + std::to_string(s);
    if (log_power != 0.0) d += " (log 1/h)^" + std::to_string(log_power);
    return d;
  }
};

}  // namespace degen
