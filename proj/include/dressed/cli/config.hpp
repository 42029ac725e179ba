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

#pragma once

// Run configuration for the dressedsim front end.
//
// The file format is one `key = value` per line; `#` starts a comment. Values
// are in laboratory units (MHz, ns, us, 1/us, rad^2/us) and are converted to
// internal angular units once, by parse_config, into RunConfig::internal.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dressed::cli {

enum class Scenario { kPsd, kSpinLock, kDressedRelax, kSwapCal, kGateError, kXeb, kSweep };

std::string_view to_string(Scenario s);
std::optional<Scenario> scenario_from_string(std::string_view name);

/// All violations found in a configuration, in file order.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Values derived from the laboratory-unit fields.
struct InternalUnits {
  double dt = 0.0;          // us
  double band_low = 0.0;    // rad/us
  double band_high = 0.0;   // rad/us
  double rabi = 0.0;        // rad/us
  double g = 0.0;           // rad/us
  double detuning = 0.0;    // rad/us
  double tau = 0.0;         // us
  double swap_step = 0.0;   // us
  std::vector<double> sweep_values;  // multipliers, us, or rad/us (g)

  bool operator==(const InternalUnits&) const = default;
};

struct RunConfig {
  Scenario scenario = Scenario::kDressedRelax;
  std::uint64_t seed = 1;
  std::size_t n_traj = 400;
  double dt_ns = 2.0;
  unsigned threads = 0;

  // Detuning noise: flat two-sided level over [band_low, band_high].
  double psd_level_rad2_per_us = 0.2;
  double band_low_mhz = 5.0;
  double band_high_mhz = 20.0;
  double psd_multiplier = 1.0;

  double rabi_mhz = 15.0;
  double gamma1_per_us = 0.0;

  double g_mhz = 7.5;
  double detuning_mhz = 0.0;
  double gamma1_q0_per_us = 0.0;
  double gamma1_q1_per_us = 0.0;

  double hold_max_us = 40.0;
  double hold_step_us = 0.5;
  std::string readout = "direct";       // direct | phase-sweep | shots
  std::size_t shots = 2000;
  std::size_t phase_points = 16;
  std::string preparation = "ideal";    // ideal | gate
  double prep_idle_us = 0.0;

  double swap_max_us = 0.4;
  double swap_step_ns = 2.0;

  double tau_ns = 48.0;
  double phi_rad = 0.0;
  /// Dressed flip rate for the gate channel; absent means S(2g)/2.
  std::optional<double> gamma_g_per_us;

  std::vector<std::size_t> depths{1, 2, 4, 8, 16};
  std::size_t circuits = 30;
  std::size_t xeb_shots = 0;
  std::string gate_noise = "lindblad";  // none | lindblad | stochastic

  std::string sweep = "rate-power";     // rate-power | xeb-power | xeb-tau | xeb-g
  /// PSD multipliers (power sweeps), tau in ns (xeb-tau), or 2g in MHz (xeb-g).
  std::vector<double> sweep_values{1.0, 2.0, 3.0, 5.0};
  std::string sweep_protocol = "dressed";  // dressed | spinlock
  std::string gamma_source = "analytic";   // analytic | ensemble
  std::string rate_fit = "free-offset";    // free-offset | zero-asymptote

  double psd_duration_us = 200.0;
  std::size_t psd_segment = 4096;

  bool quick = false;
  InternalUnits internal;

  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates. scenario may come from the file or from the
/// caller (a subcommand); if both are given they must agree. Throws
/// ConfigError listing every problem.
RunConfig parse_config(std::istream& in, std::optional<Scenario> scenario = std::nullopt);
RunConfig parse_config_text(std::string_view text, std::optional<Scenario> scenario = std::nullopt);
RunConfig parse_config_file(const std::string& path, std::optional<Scenario> scenario = std::nullopt);

/// Defaults for a scenario, validated.
RunConfig default_config(Scenario scenario);

/// Writes every field as `key = value`; parse_config of the output
/// reproduces the config exactly.
void write_config(std::ostream& out, const RunConfig& config);

/// Scales trajectory counts and grids down about tenfold for smoke runs.
void apply_quick(RunConfig& config);

}  // namespace dressed::cli
