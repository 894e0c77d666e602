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


#include "degen/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"

namespace degen {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "degen");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  CliRun r;
  r.code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string config(const char* name) { return std::string(DEGEN_CONFIG_DIR) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "degen_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

fs::path write_config(const std::string& name, const std::string& body) {
  const fs::path p = scratch(name);
  std::ofstream(p) << body;
  return p;
}

TEST(Cli, RateWritesCsvWithHeader) {
  const fs::path out = scratch("rates.csv");
  const CliRun r = run({"rate", "--config", config("rate.json"), "--out", out.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string text = slurp(out);
  EXPECT_EQ(text.substr(0, text.find('\n')), "n,h_n,r_n,exponent,closed_form,regime");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
}

TEST(Cli, RateJsonToStdout) {
  const CliRun r = run({"rate", "--config", config("rate.json"), "--format", "json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(r.out);
  ASSERT_EQ(j.size(), 5u);
  EXPECT_EQ(j[0]["n"].get<std::uint64_t>(), 1000u);
  EXPECT_NEAR(j[0]["exponent"].get<double>(), -0.25, 1e-15);
}

TEST(Cli, RiskIsReproducible) {
  const fs::path cfg = write_config("risk_small.json", R"({
    "design": {"beta": 0.0}, "n_grid": [256, 512, 1024], "reps": 20, "truth": {"kind": "lower_f1"}})");
  const fs::path a = scratch("risk_a.csv");
  const fs::path b = scratch("risk_b.csv");
  const CliRun ra = run({"risk", "--config", cfg.string(), "--seed", "42", "--out", a.string()});
  const CliRun rb = run({"risk", "--config", cfg.string(), "--seed", "42", "--out", b.string(),
                      "--threads", "3"});
  ASSERT_EQ(ra.code, kExitOk) << ra.err;
  ASSERT_EQ(rb.code, kExitOk) << rb.err;
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_NE(ra.err.find("slope"), std::string::npos);
  const CliRun rc = run({"risk", "--config", cfg.string(), "--seed", "43"});
  EXPECT_NE(rc.out, slurp(a));
}

TEST(Cli, ConcentrationWhichFlagOverridesConfig) {
  const fs::path cfg = write_config("conc.json", R"({
    "n_grid": [2000], "reps": 50, "concentration": {"which": "counting", "eps": [0.5]}})");
  const CliRun a = run({"concentration", "--config", cfg.string()});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_NE(a.out.find("\ncounting,2000"), std::string::npos);
  const CliRun b = run({"concentration", "--config", cfg.string(), "--which", "bandwidth_ratio"});
  ASSERT_EQ(b.code, kExitOk) << b.err;
  EXPECT_NE(b.out.find("\nbandwidth_ratio,2000"), std::string::npos);
}

TEST(Cli, LowerBound) {
  const fs::path cfg = write_config("lb.json", R"({"n_grid": [1024], "reps": 20, "p": 1})");
  const CliRun r = run({"lowerbound", "--config", cfg.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')),
            "n,h_n,r_n,kl,separation,constant,certificate,risk_f0,risk_f1,empirical_max");
}

TEST(Cli, MissingConfigNamesPath) {
  const std::string path = scratch("does_not_exist.json").string();
  const CliRun r = run({"rate", "--config", path});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find(path), std::string::npos);
}

TEST(Cli, UsageErrorsAreConfigErrors) {
  EXPECT_EQ(run({"rate", "--config", config("rate.json"), "--format", "xml"}).code, kExitConfig);
  EXPECT_EQ(run({"rate"}).code, kExitConfig);
  EXPECT_EQ(run({}).code, kExitConfig);
  EXPECT_EQ(run({"plot", "--config", config("rate.json")}).code, kExitConfig);
  const fs::path broken = write_config("broken.json", "{ not json");
  EXPECT_EQ(run({"rate", "--config", broken.string()}).code, kExitConfig);
  const fs::path invalid = write_config("invalid.json", R"({"reps": 1})");
  EXPECT_EQ(run({"rate", "--config", invalid.string()}).code, kExitConfig);
}

TEST(Cli, UnsolvableRateIsNumericalFailure) {
  const fs::path cfg = write_config("nosol.json", R"({"sigma": 1000, "n_grid": [1]})");
  const CliRun r = run({"rate", "--config", cfg.string()});
  EXPECT_EQ(r.code, kExitNumerical);
  EXPECT_NE(r.err.find("solve_hn"), std::string::npos);
}

TEST(Cli, ShippedConfigsParse) {
  for (const char* name : {"rate.json", "risk_beta0.json", "risk_beta1.json",
                           "risk_beta_exploding.json", "risk_gamma.json", "concentration.json",
                           "lowerbound.json"}) {
    EXPECT_NO_THROW(load_config(config(name))) << name;
  }
}

}  // namespace
}  // namespace degen
