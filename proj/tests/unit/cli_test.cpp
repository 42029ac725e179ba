// Copyright 2026 The dressed-relax Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dressed/cli/config.hpp"
#include "dressed/cli/run.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dressed::cli;
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 6.283185307179586;

std::vector<std::string> problems_of(std::string_view text,
                                     std::optional<Scenario> s = std::nullopt) {
  try {
    parse_config_text(text, s);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& problems, std::string_view what) {
  for (const auto& p : problems)
    if (p.find(what) != std::string::npos) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dressed_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(ParseConfig, MinimalSpinlock) {
  const auto c = parse_config_text("scenario = spinlock\nrabi_mhz = 15\n");
  EXPECT_EQ(c.scenario, Scenario::kSpinLock);
  EXPECT_DOUBLE_EQ(c.internal.rabi, kTwoPi * 15.0);
  EXPECT_DOUBLE_EQ(c.internal.dt, 0.002);
}

TEST(ParseConfig, UnitConversionsHappenOnce) {
  const auto c = parse_config_text(
      "scenario = gate-error  # trailing comment\n"
      "band_low_mhz = 4\nband_high_mhz = 21\ntau_ns = 30\ng_mhz = 5\n");
  EXPECT_DOUBLE_EQ(c.internal.band_low, kTwoPi * 4.0);
  EXPECT_DOUBLE_EQ(c.internal.band_high, kTwoPi * 21.0);
  EXPECT_DOUBLE_EQ(c.internal.tau, 0.03);
  EXPECT_DOUBLE_EQ(c.internal.g, kTwoPi * 5.0);
  EXPECT_DOUBLE_EQ(c.g_mhz, 5.0);
}

TEST(ParseConfig, GateErrorDefaults) {
  const auto c = default_config(Scenario::kGateError);
  EXPECT_DOUBLE_EQ(c.g_mhz, 7.69);
  EXPECT_DOUBLE_EQ(c.tau_ns, 48.0);
  EXPECT_DOUBLE_EQ(c.internal.tau, 0.048);
}

TEST(ParseConfig, InvertedBandNamesBothKeys) {
  const auto p = problems_of("scenario = psd\nband_low_mhz = 20\nband_high_mhz = 5\n");
  ASSERT_FALSE(p.empty());
  EXPECT_TRUE(mentions(p, "band_low_mhz must be below band_high_mhz"));
}

TEST(ParseConfig, ReportsEveryProblem) {
  const auto p = problems_of(
      "scenario = xeb\n"
      "colour = blue\n"
      "n_traj = 3\n"
      "n_traj = 400\n"
      "dt_ns = fast\n"
      "not a pair\n"
      "readout = maybe\n");
  EXPECT_TRUE(mentions(p, "unknown key 'colour'"));
  EXPECT_TRUE(mentions(p, "duplicate key 'n_traj'"));
  EXPECT_TRUE(mentions(p, "dt_ns"));
  EXPECT_TRUE(mentions(p, "expected key = value"));
  EXPECT_TRUE(mentions(p, "readout"));
  EXPECT_TRUE(mentions(p, "n_traj must be >= 20"));
  EXPECT_GE(p.size(), 6u);
}

TEST(ParseConfig, ScenarioRequiredAndConsistent) {
  EXPECT_TRUE(mentions(problems_of("seed = 3\n"), "missing required key 'scenario'"));
  EXPECT_TRUE(mentions(problems_of("scenario = warp\n"), "scenario"));
  EXPECT_TRUE(mentions(problems_of("scenario = xeb\n", Scenario::kPsd), "does not match"));
  EXPECT_EQ(parse_config_text("seed = 3\n", Scenario::kXeb).scenario, Scenario::kXeb);
}

TEST(ParseConfig, GridConsistency) {
  EXPECT_TRUE(mentions(problems_of("scenario = dressed-relax\nhold_step_us = 0.0033\n"),
                       "multiple of dt_ns"));
  EXPECT_TRUE(mentions(problems_of("scenario = xeb\ndepths = 1,4,2\n"), "depths must increase"));
  EXPECT_TRUE(mentions(problems_of("scenario = sweep\nsweep_values = 1,2,3\n"), "at least 4"));
}

TEST(ParseConfig, SweepDefaultsFollowSweepKind) {
  const auto g = parse_config_text("scenario = sweep\nsweep = xeb-g\n");
  EXPECT_EQ(g.rate_fit, "zero-asymptote");
  EXPECT_EQ(g.sweep_values, (std::vector<double>{2.0, 10.0, 15.0, 19.0, 30.0}));
  EXPECT_DOUBLE_EQ(g.internal.sweep_values[2], kTwoPi * 7.5);
  const auto p = parse_config_text("scenario = sweep\n");
  EXPECT_EQ(p.rate_fit, "free-offset");
  EXPECT_EQ(parse_config_text("scenario = sweep\nsweep = xeb-g\nrate_fit = free-offset\n").rate_fit,
            "free-offset");
}

TEST(ParseConfig, MissingFile) {
  EXPECT_THROW(parse_config_file("/nonexistent/dressed.cfg"), ConfigError);
}

TEST(WriteConfig, RoundTripsEveryScenario) {
  for (auto s : {Scenario::kPsd, Scenario::kSpinLock, Scenario::kDressedRelax, Scenario::kSwapCal,
                 Scenario::kGateError, Scenario::kXeb, Scenario::kSweep}) {
    auto c = default_config(s);
    c.seed = 12345678901234567ull;
    c.psd_level_rad2_per_us = 0.1 + 0.2;  // not exactly representable in short decimal
    c.gamma_g_per_us = 1.0 / 3.0;
    c = parse_config_text([&] {
      std::ostringstream os;
      write_config(os, c);
      return os.str();
    }());
    std::ostringstream os;
    write_config(os, c);
    const auto back = parse_config_text(os.str());
    EXPECT_EQ(back, c) << to_string(s);
  }
}

TEST(ApplyQuick, ScalesDownAndStaysValid) {
  auto c = default_config(Scenario::kDressedRelax);
  apply_quick(c);
  EXPECT_TRUE(c.quick);
  EXPECT_EQ(c.n_traj, 40u);
  EXPECT_DOUBLE_EQ(c.hold_step_us, 2.0);
  std::ostringstream os;
  write_config(os, c);
  EXPECT_EQ(parse_config_text(os.str()), c);
}

TEST(RunScenario, RerunsAreByteIdentical) {
  for (auto s : {Scenario::kPsd, Scenario::kSpinLock, Scenario::kDressedRelax, Scenario::kSwapCal,
                 Scenario::kGateError, Scenario::kXeb, Scenario::kSweep}) {
    auto c = default_config(s);
    c.hold_max_us = 8.0;
    c.seed = 5;
    apply_quick(c);
    const auto a = scratch(std::string(to_string(s)) + "_a");
    const auto b = scratch(std::string(to_string(s)) + "_b");
    const auto ra = run_scenario(c, a.string());
    const auto rb = run_scenario(c, b.string());
    ASSERT_EQ(ra.files, rb.files);
    ASSERT_GE(ra.files.size(), 2u);
    for (const auto& f : ra.files) {
      if (f == "manifest.txt") continue;
      EXPECT_EQ(slurp(a / f), slurp(b / f)) << to_string(s) << ' ' << f;
    }
    fs::remove_all(a);
    fs::remove_all(b);
  }
}

TEST(RunScenario, ManifestEchoesConfig) {
  auto c = default_config(Scenario::kSwapCal);
  c.seed = 77;
  const auto dir = scratch("manifest");
  const auto r = run_scenario(c, dir.string());
  EXPECT_EQ(r.files.back(), "manifest.txt");
  const auto echoed = parse_config_file((dir / "manifest.txt").string());
  EXPECT_EQ(echoed, c);
  fs::remove_all(dir);
}

TEST(RunScenario, DressedRelaxEmitsSeriesAndRate) {
  auto c = default_config(Scenario::kDressedRelax);
  c.hold_max_us = 8.0;
  apply_quick(c);
  const auto dir = scratch("dressed");
  run_scenario(c, dir.string());
  ASSERT_TRUE(fs::exists(dir / "dressed_relax.csv"));
  ASSERT_TRUE(fs::exists(dir / "dressed_relax.json"));
  const std::string csv = slurp(dir / "dressed_relax.csv");
  EXPECT_NE(csv.substr(0, csv.find('\n')).find("_us"), std::string::npos);
  EXPECT_NE(slurp(dir / "dressed_relax.json").find("rate"), std::string::npos);
  fs::remove_all(dir);
}

TEST(RunScenario, RatePowerSweepHasLinearFit) {
  auto c = parse_config_text(
      "scenario = sweep\nsweep = rate-power\nsweep_values = 1,2,3,5\nhold_max_us = 8\n");
  apply_quick(c);
  const auto dir = scratch("sweep");
  run_scenario(c, dir.string());
  const std::string csv = slurp(dir / "sweep.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  const std::string json = slurp(dir / "sweep.json");
  EXPECT_NE(json.find("slope"), std::string::npos);
  EXPECT_NE(json.find("r_squared"), std::string::npos);
  fs::remove_all(dir);
}
