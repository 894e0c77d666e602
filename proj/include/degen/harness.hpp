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
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <mutex>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "degen/design.hpp"
#include "degen/errors.hpp"
#include "degen/estimators.hpp"
#include "degen/kernels.hpp"
#include "degen/modulus.hpp"
#include "degen/rates.hpp"
#include "degen/rng.hpp"

namespace degen {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct DesignSpec {
  std::string kind = "regvar";  // regvar | gamma | explicit
  double x0 = 0.5;
  double beta = 0.0;
  double log_power = 0.0;
  double alpha = 1.0;

  DesignModel build() const {
    if (kind == "regvar") return DesignModel::regvar(x0, beta, log_power);
    if (kind == "gamma") return DesignModel::gamma_var(x0, alpha);
    if (kind == "explicit") return DesignModel::explicit_power_log(x0, beta, log_power);
    throw ConfigError("design.kind must be one of regvar, gamma, explicit (got '" + kind + "')");
  }
};

struct TruthSpec {
  std::string kind = "lower_f1";  // power_cusp | lower_f0 | lower_f1 | constant | polynomial
  double c = 0.0;
  std::vector<double> coeffs;  // polynomial in (x - x0)
};

struct ConcentrationSpec {
  std::string which = "counting";  // counting | kernel_moment | eigenvalue | bandwidth_ratio
  std::vector<double> eps{0.25, 0.5};
  std::vector<unsigned> alphas{0, 1, 2};
  std::optional<double> h;   // window; defaults to h_n
  std::optional<double> nf;  // target n F(h); overrides h
};

struct ExperimentConfig {
  DesignSpec design;
  Modulus modulus{1.0, 1.0, 0.0};
  std::string kernel = "rect";
  std::string estimator = "localpoly";  // localpoly | regressogram | gamma2w
  std::string bandwidth_mode = "adaptive";  // fixed | theoretical | adaptive
  double bandwidth_h = 0.1;
  double sigma = 1.0;
  double p = 2.0;
  std::vector<std::uint64_t> n_grid{1024, 2048, 4096, 8192, 16384, 32768, 65536};
  std::size_t reps = 200;
  std::uint64_t master_seed = 0;
  TruthSpec truth;
  ConcentrationSpec concentration;

  void validate() const {
    (void)design.build();
    modulus.validate();
    (void)Kernel::from_id(kernel);
    if (estimator != "localpoly" && estimator != "regressogram" && estimator != "gamma2w") {
      throw ConfigError("estimator must be one of localpoly, regressogram, gamma2w");
    }
    if (bandwidth_mode != "fixed" && bandwidth_mode != "theoretical" &&
        bandwidth_mode != "adaptive") {
      throw ConfigError("bandwidth.mode must be one of fixed, theoretical, adaptive");
    }
    if (bandwidth_mode == "fixed" && !(bandwidth_h > 0.0)) {
      throw ConfigError("bandwidth.h must be positive");
    }
    if (estimator == "gamma2w" && design.kind != "gamma") {
      throw ConfigError("estimator gamma2w requires a gamma design");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("sigma must be nonnegative");
    if (!(p > 0.0)) throw ConfigError("p must be positive");
    if (n_grid.empty()) throw ConfigError("n_grid must not be empty");
    for (auto n : n_grid) {
      if (n == 0) throw ConfigError("n_grid entries must be positive");
    }
    if (reps < 2) throw ConfigError("reps must be at least 2");
    const auto& k = truth.kind;
    if (k != "power_cusp" && k != "lower_f0" && k != "lower_f1" && k != "constant" &&
        k != "polynomial") {
      throw ConfigError("truth.kind must be one of power_cusp, lower_f0, lower_f1, constant, polynomial");
    }
    if (k == "polynomial" && truth.coeffs.empty()) {
      throw ConfigError("truth.coeffs must not be empty for a polynomial truth");
    }
    const auto& w = concentration.which;
    if (w != "counting" && w != "kernel_moment" && w != "eigenvalue" && w != "bandwidth_ratio") {
      throw ConfigError("concentration.which must be one of counting, kernel_moment, eigenvalue, bandwidth_ratio");
    }
  }
};

namespace detail {

template <class T>
T json_get(const Json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

inline const Json& json_object(const Json& j, const char* key) {
  static const Json empty = Json::object();
  if (!j.contains(key)) return empty;
  const Json& v = j.at(key);
  if (!v.is_object()) throw ConfigError(std::string("config key '") + key + "' must be an object");
  return v;
}

}  // namespace detail

inline ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  using detail::json_get;
  ExperimentConfig c;
  const Json& d = detail::json_object(j, "design");
  c.design.kind = json_get(d, "kind", c.design.kind);
  c.design.x0 = json_get(d, "x0", c.design.x0);
  c.design.beta = json_get(d, "beta", c.design.beta);
  c.design.log_power = json_get(d, "log_power", c.design.log_power);
  c.design.alpha = json_get(d, "alpha", c.design.alpha);
  const Json& m = detail::json_object(j, "modulus");
  c.modulus.r = json_get(m, "r", c.modulus.r);
  c.modulus.s = json_get(m, "s", c.modulus.s);
  c.modulus.log_power = json_get(m, "log_power", c.modulus.log_power);
  c.kernel = json_get(j, "kernel", c.kernel);
  c.estimator = json_get(j, "estimator", c.estimator);
  const Json& b = detail::json_object(j, "bandwidth");
  c.bandwidth_mode = json_get(b, "mode", c.bandwidth_mode);
  c.bandwidth_h = json_get(b, "h", c.bandwidth_h);
  c.sigma = json_get(j, "sigma", c.sigma);
  c.p = json_get(j, "p", c.p);
  c.n_grid = json_get(j, "n_grid", c.n_grid);
  c.reps = json_get(j, "reps", c.reps);
  c.master_seed = json_get(j, "master_seed", c.master_seed);
  const Json& t = detail::json_object(j, "truth");
  c.truth.kind = json_get(t, "kind", c.truth.kind);
  c.truth.c = json_get(t, "c", c.truth.c);
  c.truth.coeffs = json_get(t, "coeffs", c.truth.coeffs);
  const Json& k = detail::json_object(j, "concentration");
  c.concentration.which = json_get(k, "which", c.concentration.which);
  c.concentration.eps = json_get(k, "eps", c.concentration.eps);
  c.concentration.alphas = json_get(k, "alphas", c.concentration.alphas);
  if (k.contains("h")) c.concentration.h = json_get(k, "h", 0.0);
  if (k.contains("nf")) c.concentration.nf = json_get(k, "nf", 0.0);
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Parallel replication and reproducible reduction
// ---------------------------------------------------------------------------

/// Runs body(i) for i in [0, count) on `threads` workers (0 = all cores).
/// The first exception thrown by any worker is rethrown on the caller.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

/// Pairwise sum with a fixed split, so the result depends only on the values.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

// ---------------------------------------------------------------------------
// Truth functions and single replications
// ---------------------------------------------------------------------------

/// Regression function for one sample size; lower_f0/f1 depend on h_n.
struct Truth {
  std::string kind;
  Modulus modulus;
  double x0 = 0.5;
  double h_n = 0.0;
  double c = 0.0;
  std::vector<double> coeffs;

  double operator()(double x) const {
    const double d = std::abs(x - x0);
    if (kind == "power_cusp") return modulus(d);
    if (kind == "lower_f0") return d <= h_n ? modulus(h_n) : 0.0;
    if (kind == "lower_f1") return d <= h_n ? modulus(d) : 0.0;
    if (kind == "constant") return c;
    double v = 0.0;
    for (std::size_t j = coeffs.size(); j-- > 0;) v = v * (x - x0) + coeffs[j];
    return v;
  }

  double at_x0() const { return (*this)(x0); }
};

inline Truth make_truth(const ExperimentConfig& cfg, double h_n) {
  return Truth{cfg.truth.kind, cfg.modulus, cfg.design.x0, h_n, cfg.truth.c, cfg.truth.coeffs};
}

/// Everything a replication needs at one sample size.
struct CellContext {
  const ExperimentConfig* cfg = nullptr;
  DesignModel design;
  Kernel kernel;
  std::uint64_t n = 0;
  double h_n = 0.0;  // solution of the rate equation, NaN when unavailable
  Truth truth;
};

inline double theoretical_bandwidth(const ExperimentConfig& cfg, const DesignModel& design,
                                    std::uint64_t n) {
  return solve_hn(cfg.modulus, design, static_cast<double>(n), cfg.sigma);
}

inline CellContext make_cell(const ExperimentConfig& cfg, const DesignModel& design,
                             std::uint64_t n) {
  CellContext ctx{&cfg, design, Kernel::from_id(cfg.kernel), n,
                  std::numeric_limits<double>::quiet_NaN(), {}};
  const bool needs_hn = cfg.bandwidth_mode == "theoretical" || cfg.truth.kind == "lower_f0" ||
                        cfg.truth.kind == "lower_f1" || cfg.estimator == "gamma2w";
  if (needs_hn) ctx.h_n = theoretical_bandwidth(cfg, design, n);
  ctx.truth = make_truth(cfg, ctx.h_n);
  return ctx;
}

struct Observations {
  std::vector<double> xs;
  std::vector<double> ys;
};

inline Observations draw(const CellContext& ctx, std::uint64_t seed) {
  Observations obs;
  obs.xs = sample(ctx.design, ctx.n, seed).xs;
  obs.ys.resize(obs.xs.size());
  const double sigma = ctx.cfg->sigma;
  for (std::size_t i = 0; i < obs.xs.size(); ++i) {
    obs.ys[i] = ctx.truth(obs.xs[i]) + sigma * standard_normal(seed, Stream::kNoise, i);
  }
  return obs;
}

inline double choose_bandwidth(const CellContext& ctx, std::span<const double> xs) {
  const ExperimentConfig& cfg = *ctx.cfg;
  if (cfg.bandwidth_mode == "fixed") return cfg.bandwidth_h;
  if (cfg.bandwidth_mode == "theoretical") return ctx.h_n;
  return select_bandwidth(xs, cfg.design.x0, cfg.modulus, cfg.sigma);
}

/// Point estimate of f(x0) from one replication.
inline double apply_estimator(const CellContext& ctx, const Observations& obs) {
  const ExperimentConfig& cfg = *ctx.cfg;
  const double x0 = cfg.design.x0;
  if (cfg.estimator == "gamma2w") {
    const double h = (cfg.bandwidth_mode == "fixed") ? cfg.bandwidth_h : ctx.h_n;
    const double alpha = cfg.design.alpha;
    return gamma_two_window(obs.xs, obs.ys, x0, h, std::pow(h, alpha + 1.0) / alpha, ctx.kernel);
  }
  const double h = choose_bandwidth(ctx, obs.xs);
  if (cfg.estimator == "regressogram") return regressogram(obs.xs, obs.ys, x0, h);
  return local_poly_fit(obs.xs, obs.ys, x0, h, ctx.kernel, cfg.modulus.degree()).estimate;
}

// ---------------------------------------------------------------------------
// Risk
// ---------------------------------------------------------------------------

struct RiskEstimate {
  std::uint64_t n = 0;
  double mean_risk = 0.0;  // (mean |T - f(x0)|^p)^(1/p)
  double std_err = 0.0;
  std::size_t reps = 0;
  std::size_t rejected_reps = 0;
  double h_n = std::numeric_limits<double>::quiet_NaN();
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n_points = 0;
};

/// p-th root of the mean of `powers` with a delta-method standard error.
inline RiskEstimate summarize_risk(std::uint64_t n, std::span<const double> powers, double p) {
  RiskEstimate est;
  est.n = n;
  est.reps = powers.size();
  const double count = static_cast<double>(powers.size());
  const double mean = pairwise_sum(powers) / count;
  std::vector<double> sq(powers.size());
  for (std::size_t i = 0; i < powers.size(); ++i) sq[i] = (powers[i] - mean) * (powers[i] - mean);
  const double var = pairwise_sum(sq) / (count - 1.0);
  const double se_mean = std::sqrt(var / count);
  est.mean_risk = std::pow(mean, 1.0 / p);
  est.std_err = mean > 0.0 ? std::pow(mean, 1.0 / p - 1.0) / p * se_mean : 0.0;
  return est;
}

/// |T_n(x0) - f(x0)|^p for every replication at sample size n.
inline std::vector<double> risk_powers(const CellContext& ctx, unsigned threads) {
  const ExperimentConfig& cfg = *ctx.cfg;
  std::vector<double> powers(cfg.reps);
  const double target = ctx.truth.at_x0();
  parallel_for(cfg.reps, threads, [&](std::size_t rep) {
    const std::uint64_t seed = derive_seed(cfg.master_seed, ctx.n, rep);
    const double est = apply_estimator(ctx, draw(ctx, seed));
    if (!std::isfinite(est)) {
      throw NumericalError("risk: non-finite estimate at n = " + std::to_string(ctx.n) +
                           ", replication " + std::to_string(rep));
    }
    powers[rep] = std::pow(std::abs(est - target), cfg.p);
  });
  return powers;
}

inline std::vector<RiskEstimate> run_risk(const ExperimentConfig& cfg, unsigned threads = 1) {
  const DesignModel design = cfg.design.build();
  std::vector<RiskEstimate> out;
  for (std::uint64_t n : cfg.n_grid) {
    const CellContext ctx = make_cell(cfg, design, n);
    const std::vector<double> powers = risk_powers(ctx, threads);
    RiskEstimate est = summarize_risk(n, powers, cfg.p);
    est.h_n = ctx.h_n;
    out.push_back(est);
  }
  return out;
}

/// Ordinary least squares of log mean_risk on log n.
inline SlopeFit fit_exponent(std::span<const RiskEstimate> estimates) {
  if (estimates.size() < 3) throw DomainError("fit_exponent: need at least 3 points");
  std::vector<double> lx;
  std::vector<double> ly;
  for (const auto& e : estimates) {
    if (!(e.mean_risk > 0.0)) throw DomainError("fit_exponent: risks must be positive");
    lx.push_back(std::log(static_cast<double>(e.n)));
    ly.push_back(std::log(e.mean_risk));
  }
  std::vector<double> sorted = lx;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("fit_exponent: sample sizes must be distinct");
  }
  const double k = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
  fit.n_points = lx.size();
  return fit;
}

// ---------------------------------------------------------------------------
// Concentration diagnostics
// ---------------------------------------------------------------------------

struct ConcentrationRow {
  std::string which;
  std::uint64_t n = 0;
  double eps = 0.0;
  int alpha = -1;  // kernel moment order, -1 when not applicable
  double h = 0.0;
  double nf = 0.0;  // n F(h), with F the normalized local primitive
  std::size_t reps = 0;
  double frequency = 0.0;  // empirical exceedance frequency
  double bound = std::numeric_limits<double>::quiet_NaN();
  double bound_se = std::numeric_limits<double>::quiet_NaN();
  double mean_stat = 0.0;
  double target = 0.0;
  bool within_bound = true;
};

/// 2 exp(-eps^2 / (1 + eps/3) nF).
inline double counting_bound(double eps, double nf) {
  return 2.0 * std::exp(-eps * eps / (1.0 + eps / 3.0) * nf);
}

/// 2 exp(-eps^2 / (8 (2 + eps/3)) nF).
inline double kernel_moment_bound(double eps, double nf) {
  return 2.0 * std::exp(-eps * eps / (8.0 * (2.0 + eps / 3.0)) * nf);
}

namespace detail {

inline void finish_row(ConcentrationRow& row, std::size_t exceed) {
  const double reps = static_cast<double>(row.reps);
  row.frequency = static_cast<double>(exceed) / reps;
  if (std::isfinite(row.bound)) {
    const double b = std::min(row.bound, 1.0);
    row.bound_se = std::sqrt(b * (1.0 - b) / reps);
    row.within_bound = row.frequency <= row.bound + 3.0 * row.bound_se;
  }
}

inline double mean_of(std::span<const double> v) {
  return pairwise_sum(v) / static_cast<double>(v.size());
}

}  // namespace detail

/// Window used by the counting and kernel-moment diagnostics: the h with
/// n F(h) = nf when nf is configured, else the fixed h, else h_n.
inline double concentration_window(const ExperimentConfig& cfg, const DesignModel& design,
                                   std::uint64_t n) {
  const auto& cs = cfg.concentration;
  if (cs.nf) {
    const double target = 2.0 * *cs.nf / static_cast<double>(n);
    if (!(target < design.local_mass(design.reach()))) {
      throw ConfigError("concentration.nf too large for n = " + std::to_string(n));
    }
    return generalized_inverse([&](double h) { return design.local_mass(h); }, target, 0.0,
                               design.reach(), 1e-15);
  }
  if (cs.h) return *cs.h;
  return theoretical_bandwidth(cfg, design, n);
}

inline std::vector<ConcentrationRow> run_concentration(const ExperimentConfig& cfg,
                                                       const std::string& which,
                                                       unsigned threads = 1) {
  const DesignModel design = cfg.design.build();
  const Kernel kernel = Kernel::from_id(cfg.kernel);
  const double x0 = cfg.design.x0;
  const std::size_t reps = cfg.reps;
  std::vector<ConcentrationRow> rows;
  if (which != "counting" && which != "kernel_moment" && which != "eigenvalue" &&
      which != "bandwidth_ratio") {
    throw ConfigError("unknown concentration diagnostic '" + which + "'");
  }
  if ((which == "kernel_moment" || which == "eigenvalue") &&
      (design.kind() != DesignKind::kRegVar || !(cfg.design.beta > -1.0))) {
    throw ConfigError(which + " diagnostic needs a regularly varying design with beta > -1");
  }
  for (std::uint64_t n : cfg.n_grid) {
    const double nd = static_cast<double>(n);
    const CellContext ctx = make_cell(cfg, design, n);
    const double h = (which == "counting" || which == "kernel_moment")
                         ? concentration_window(cfg, design, n)
                         : theoretical_bandwidth(cfg, design, n);
    const double nf = 0.5 * nd * design.local_mass(h);
    auto seed_of = [&](std::size_t rep) { return derive_seed(cfg.master_seed, n, rep); };

    if (which == "counting") {
      std::vector<double> ratio(reps);
      parallel_for(reps, threads, [&](std::size_t rep) {
        const auto xs = sample(design, n, seed_of(rep)).xs;
        std::size_t count = 0;
        for (double x : xs) count += std::abs(x - x0) <= h;
        ratio[rep] = static_cast<double>(count) / (2.0 * nf);
      });
      for (double eps : cfg.concentration.eps) {
        ConcentrationRow row{which, n, eps, -1, h, nf, reps};
        std::size_t exceed = 0;
        for (double r : ratio) exceed += std::abs(r - 1.0) > eps;
        row.bound = counting_bound(eps, nf);
        row.mean_stat = detail::mean_of(ratio);
        row.target = 1.0;
        detail::finish_row(row, exceed);
        rows.push_back(row);
      }
    } else if (which == "kernel_moment") {
      const auto& alphas = cfg.concentration.alphas;
      // stat[a][rep] = K_{n,h,alpha} / (n F), kbar[a][rep] = K_{n,h,alpha} / N
      std::vector<std::vector<double>> stat(alphas.size(), std::vector<double>(reps));
      std::vector<std::vector<double>> kbar(alphas.size(), std::vector<double>(reps));
      parallel_for(reps, threads, [&](std::size_t rep) {
        const auto xs = sample(design, n, seed_of(rep)).xs;
        std::vector<double> sums(alphas.size(), 0.0);
        std::size_t count = 0;
        for (double x : xs) {
          const double d = x - x0;
          if (std::abs(d) > h) continue;
          ++count;
          const double u = d / h;
          const double w = kernel(u);
          for (std::size_t a = 0; a < alphas.size(); ++a) {
            sums[a] += std::pow(u, static_cast<double>(alphas[a])) * w;
          }
        }
        for (std::size_t a = 0; a < alphas.size(); ++a) {
          stat[a][rep] = sums[a] / nf;
          kbar[a][rep] = count > 0 ? sums[a] / static_cast<double>(count) : 0.0;
        }
      });
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        const double limit = (cfg.design.beta + 1.0) * limit_moment(alphas[a], cfg.design.beta, kernel);
        for (double eps : cfg.concentration.eps) {
          ConcentrationRow row{which, n, eps, static_cast<int>(alphas[a]), h, nf, reps};
          std::size_t exceed = 0;
          for (double v : stat[a]) exceed += std::abs(v - limit) > eps;
          row.bound = kernel_moment_bound(eps, nf);
          row.mean_stat = detail::mean_of(kbar[a]);
          row.target = 0.5 * limit;
          detail::finish_row(row, exceed);
          rows.push_back(row);
        }
      }
    } else if (which == "eigenvalue") {
      const unsigned k = cfg.modulus.degree();
      const double lambda_limit = limit_matrix_lambda(cfg.design.beta, kernel, k);
      std::vector<double> lambda(reps);
      parallel_for(reps, threads, [&](std::size_t rep) {
        const Observations obs = draw(ctx, seed_of(rep));
        lambda[rep] = corrected_solve(build_system(obs.xs, obs.ys, x0, h, kernel, k)).lambda_min;
      });
      for (double eps : cfg.concentration.eps) {
        ConcentrationRow row{which, n, eps, -1, h, nf, reps};
        std::size_t exceed = 0;
        for (double v : lambda) exceed += std::abs(v - lambda_limit) > eps;
        row.mean_stat = detail::mean_of(lambda);
        row.target = lambda_limit;
        detail::finish_row(row, exceed);
        rows.push_back(row);
      }
    } else {
      std::vector<double> ratio(reps);
      parallel_for(reps, threads, [&](std::size_t rep) {
        const auto xs = sample(design, n, seed_of(rep)).xs;
        ratio[rep] = select_bandwidth(xs, x0, cfg.modulus, cfg.sigma) / h;
      });
      for (double eps : cfg.concentration.eps) {
        ConcentrationRow row{which, n, eps, -1, h, nf, reps};
        std::size_t exceed = 0;
        for (double r : ratio) exceed += std::abs(r - 1.0) > eps;
        row.mean_stat = detail::mean_of(ratio);
        row.target = 1.0;
        detail::finish_row(row, exceed);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Lower bound
// ---------------------------------------------------------------------------

struct LowerBoundRow {
  std::uint64_t n = 0;
  LowerBoundCertificate cert;
  double risk_f0 = 0.0;
  double risk_f1 = 0.0;
  double empirical_max = 0.0;
};

/// Certificate plus the empirical risk of the configured estimator against
/// both hypotheses, at every n in the grid.
inline std::vector<LowerBoundRow> run_lower_bound(const ExperimentConfig& cfg,
                                                  unsigned threads = 1) {
  const DesignModel design = cfg.design.build();
  std::vector<LowerBoundRow> rows;
  for (std::uint64_t n : cfg.n_grid) {
    LowerBoundRow row;
    row.n = n;
    row.cert = lower_bound_certificate(cfg.modulus, design, static_cast<double>(n), cfg.sigma,
                                       cfg.p);
    for (const char* kind : {"lower_f0", "lower_f1"}) {
      ExperimentConfig sub = cfg;
      sub.truth.kind = kind;
      const CellContext ctx = make_cell(sub, design, n);
      const std::vector<double> powers = risk_powers(ctx, threads);
      const double risk = summarize_risk(n, powers, cfg.p).mean_risk;
      (std::string(kind) == "lower_f0" ? row.risk_f0 : row.risk_f1) = risk;
    }
    row.empirical_max = std::max(row.risk_f0, row.risk_f1);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Rate table
// ---------------------------------------------------------------------------

inline std::vector<RateReport> run_rate(const ExperimentConfig& cfg) {
  const DesignModel design = cfg.design.build();
  std::vector<RateReport> out;
  for (std::uint64_t n : cfg.n_grid) {
    out.push_back(asymptotic_rate(cfg.modulus, design, static_cast<double>(n), cfg.sigma));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

/// Column-ordered table of numbers and strings, rendered as CSV or JSON.
class Table {
 public:
  using Cell = std::variant<double, std::uint64_t, std::string, bool>;

  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size()) throw DomainError("Table: row width mismatch");
    rows_.push_back(std::move(row));
  }

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t size() const { return rows_.size(); }

  void write_csv(std::ostream& os) const {
    for (std::size_t c = 0; c < columns_.size(); ++c) os << (c ? "," : "") << columns_[c];
    os << "\n";
    for (const auto& row : rows_) {
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) os << ",";
        os << csv_cell(row[c]);
      }
      os << "\n";
    }
  }

  void write_json(std::ostream& os) const {
    Json arr = Json::array();
    for (const auto& row : rows_) {
      Json rec = Json::object();
      for (std::size_t c = 0; c < row.size(); ++c) rec[columns_[c]] = json_cell(row[c]);
      arr.push_back(std::move(rec));
    }
    os << arr.dump(2) << "\n";
  }

 private:
  static std::string format_double(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

  static std::string csv_cell(const Cell& cell) {
    if (const double* d = std::get_if<double>(&cell)) return format_double(*d);
    if (const std::uint64_t* u = std::get_if<std::uint64_t>(&cell)) return std::to_string(*u);
    if (const bool* b = std::get_if<bool>(&cell)) return *b ? "true" : "false";
    const std::string& s = std::get<std::string>(cell);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += (ch == '"') ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }

  static Json json_cell(const Cell& cell) {
    if (const double* d = std::get_if<double>(&cell)) {
      return std::isfinite(*d) ? Json(*d) : Json(nullptr);
    }
    if (const std::uint64_t* u = std::get_if<std::uint64_t>(&cell)) return Json(*u);
    if (const bool* b = std::get_if<bool>(&cell)) return Json(*b);
    return Json(std::get<std::string>(cell));
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

inline double or_nan(const std::optional<double>& v) {
  return v.value_or(std::numeric_limits<double>::quiet_NaN());
}

inline Table rate_table(std::span<const RateReport> reports) {
  Table t({"n", "h_n", "r_n", "exponent", "closed_form", "regime"});
  for (const auto& r : reports) {
    t.add_row({static_cast<std::uint64_t>(r.n), r.h_n, r.r_n, r.exponent, or_nan(r.closed_form),
               r.regime_label});
  }
  return t;
}

inline Table risk_table(std::span<const RiskEstimate> estimates) {
  Table t({"n", "mean_risk", "std_err", "reps", "rejected_reps", "h_n"});
  for (const auto& e : estimates) {
    t.add_row({e.n, e.mean_risk, e.std_err, static_cast<std::uint64_t>(e.reps),
               static_cast<std::uint64_t>(e.rejected_reps), e.h_n});
  }
  return t;
}

inline Table concentration_table(std::span<const ConcentrationRow> rows) {
  Table t({"which", "n", "eps", "alpha", "h", "nF", "reps", "frequency", "bound", "bound_se",
           "mean_stat", "target", "within_bound"});
  for (const auto& r : rows) {
    t.add_row({r.which, r.n, r.eps,
               r.alpha < 0 ? Table::Cell(std::string()) : Table::Cell(static_cast<std::uint64_t>(r.alpha)),
               r.h, r.nf, static_cast<std::uint64_t>(r.reps), r.frequency, r.bound, r.bound_se,
               r.mean_stat, r.target, r.within_bound});
  }
  return t;
}

inline Table lower_bound_table(std::span<const LowerBoundRow> rows) {
  Table t({"n", "h_n", "r_n", "kl", "separation", "constant", "certificate", "risk_f0", "risk_f1",
           "empirical_max"});
  for (const auto& r : rows) {
    t.add_row({r.n, r.cert.h_n, r.cert.r_n, r.cert.kl, r.cert.separation, r.cert.constant,
               r.cert.bound_value, r.risk_f0, r.risk_f1, r.empirical_max});
  }
  return t;
}

}  // namespace degen
