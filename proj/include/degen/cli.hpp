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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "degen/errors.hpp"
#include "degen/harness.hpp"

namespace degen {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

/// Entry point of the `degen` tool. Output goes to --out, or to `out` when
/// no path is given; diagnostics go to `err`.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Pointwise regression under degenerate designs: rates and Monte Carlo experiments",
               "degen"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format = "csv";
  unsigned threads = 1;
  std::string which;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment configuration (JSON)")->required();
    sub->add_option("--seed", seed, "master seed, overrides master_seed");
    sub->add_option("--out", out_path, "output file (default: standard output)");
    sub->add_option("--format", format, "output format")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", threads, "worker threads, 0 for all cores");
  };
  CLI::App* rate = app.add_subcommand("rate", "bandwidth h_n and rate r_n over n_grid");
  CLI::App* risk = app.add_subcommand("risk", "Monte Carlo risk over n_grid");
  CLI::App* conc = app.add_subcommand("concentration", "concentration diagnostics");
  CLI::App* lower = app.add_subcommand("lowerbound", "two-point lower-bound certificate");
  for (CLI::App* sub : {rate, risk, conc, lower}) add_common(sub);
  conc->add_option("--which", which,
                   "counting, kernel_moment, eigenvalue or bandwidth_ratio (default: from config)")
      ->check(CLI::IsMember({"counting", "kernel_moment", "eigenvalue", "bandwidth_ratio"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    err << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "degen: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    ExperimentConfig cfg = load_config(config_path);
    if (seed) cfg.master_seed = *seed;

    std::optional<Table> table;
    if (rate->parsed()) {
      table = rate_table(run_rate(cfg));
    } else if (risk->parsed()) {
      const auto estimates = run_risk(cfg, threads);
      table = risk_table(estimates);
      if (estimates.size() >= 3) {
        bool positive = true;
        for (const auto& e : estimates) positive = positive && e.mean_risk > 0.0;
        if (positive) {
          const SlopeFit fit = fit_exponent(estimates);
          err << "slope " << fit.slope << " (r^2 = " << fit.r_squared << ")\n";
        }
      }
    } else if (conc->parsed()) {
      table = concentration_table(
          run_concentration(cfg, which.empty() ? cfg.concentration.which : which, threads));
    } else {
      table = lower_bound_table(run_lower_bound(cfg, threads));
    }

    std::ofstream file;
    std::ostream* sink = &out;
    if (!out_path.empty() && out_path != "-") {
      file.open(out_path, std::ios::binary);
      if (!file) throw ConfigError("cannot open output file '" + out_path + "'");
      sink = &file;
    }
    if (format == "json") {
      table->write_json(*sink);
    } else {
      table->write_csv(*sink);
    }
    sink->flush();
    if (!*sink) throw NumericalError("failed writing output");
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "degen: configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "degen: numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace degen
