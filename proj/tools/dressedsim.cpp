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

// Command-line front end: dressedsim <scenario> [--config file] [--seed n]
// [--out dir] [--quick].

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dressed/cli/config.hpp"
#include "dressed/cli/run.hpp"

namespace {

int run(dressed::cli::Scenario scenario, const std::string& config_path,
        std::optional<std::uint64_t> seed, const std::string& out_dir, bool quick) {
  using namespace dressed::cli;
  RunConfig cfg = config_path.empty() ? default_config(scenario)
                                      : parse_config_file(config_path, scenario);
  if (seed) cfg.seed = *seed;
  if (quick) apply_quick(cfg);
  const RunOutput out = run_scenario(cfg, out_dir);
  for (const auto& f : out.files) std::cout << out_dir << '/' << f << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dressed-state relaxation and gate-error simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool quick = false;
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--out", out_dir, "Output directory");
  app.add_flag("--quick", quick, "Scale trajectories and grids down about tenfold");
  app.fallthrough();

  const char* names[] = {"psd", "spinlock", "dressed-relax", "swap-cal", "gate-error", "xeb", "sweep"};
  for (const char* n : names) app.add_subcommand(n, std::string("Run the ") + n + " scenario");

  CLI11_PARSE(app, argc, argv);

  const auto scenario = dressed::cli::scenario_from_string(app.get_subcommands().front()->get_name());
  try {
    std::optional<std::uint64_t> s;
    if (seed_opt->count() > 0) s = seed;
    return run(*scenario, config_path, s, out_dir, quick);
  } catch (const dressed::cli::ConfigError& e) {
    std::cerr << "dressedsim: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "dressedsim: " << e.what() << '\n';
    return 1;
  }
}
