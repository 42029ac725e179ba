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

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "dressed/io.hpp"
#include "dressed/units.hpp"

namespace dressed::cli {

namespace {

constexpr std::pair<Scenario, std::string_view> kScenarioNames[] = {
    {Scenario::kPsd, "psd"},           {Scenario::kSpinLock, "spinlock"},
    {Scenario::kDressedRelax, "dressed-relax"}, {Scenario::kSwapCal, "swap-cal"},
    {Scenario::kGateError, "gate-error"}, {Scenario::kXeb, "xeb"},
    {Scenario::kSweep, "sweep"}};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(',', start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool read_number(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc{} && r.ptr == s.data() + s.size() && std::isfinite(out);
}

template <class T>
bool read_unsigned(std::string_view s, T& out) {
  if (s.empty()) return false;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc{} && r.ptr == s.data() + s.size();
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + io::format_double(v[i]);
  return s;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

// Returns an error message, or empty on success.
using Setter = std::function<std::string(RunConfig&, std::string_view)>;
using Getter = std::function<std::optional<std::string>(const RunConfig&)>;

struct Field {
  std::string_view key;
  Setter set;
  Getter get;
};

Field real(std::string_view key, double RunConfig::*m) {
  return {key,
          [m](RunConfig& c, std::string_view v) -> std::string {
            return read_number(v, c.*m) ? "" : "expected a number";
          },
          [m](const RunConfig& c) -> std::optional<std::string> { return io::format_double(c.*m); }};
}

template <class T>
Field count(std::string_view key, T RunConfig::*m) {
  return {key,
          [m](RunConfig& c, std::string_view v) -> std::string {
            return read_unsigned(v, c.*m) ? "" : "expected a non-negative integer";
          },
          [m](const RunConfig& c) -> std::optional<std::string> { return std::to_string(c.*m); }};
}

Field choice(std::string_view key, std::string RunConfig::*m, std::vector<std::string> allowed) {
  return {key,
          [m, allowed](RunConfig& c, std::string_view v) -> std::string {
            for (const auto& a : allowed)
              if (v == a) {
                c.*m = a;
                return "";
              }
            std::string msg = "expected one of";
            for (const auto& a : allowed) msg += " " + a;
            return msg;
          },
          [m](const RunConfig& c) -> std::optional<std::string> { return c.*m; }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = [] {
    std::vector<Field> v;
    v.push_back({"scenario",
                 [](RunConfig& c, std::string_view s) -> std::string {
                   const auto sc = scenario_from_string(s);
                   if (!sc) return "unknown scenario '" + std::string(s) + "'";
                   c.scenario = *sc;
                   return "";
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   return std::string(to_string(c.scenario));
                 }});
    v.push_back(count("seed", &RunConfig::seed));
    v.push_back(count("n_traj", &RunConfig::n_traj));
    v.push_back(real("dt_ns", &RunConfig::dt_ns));
    v.push_back(count("threads", &RunConfig::threads));
    v.push_back(real("psd_level_rad2_per_us", &RunConfig::psd_level_rad2_per_us));
    v.push_back(real("band_low_mhz", &RunConfig::band_low_mhz));
    v.push_back(real("band_high_mhz", &RunConfig::band_high_mhz));
    v.push_back(real("psd_multiplier", &RunConfig::psd_multiplier));
    v.push_back(real("rabi_mhz", &RunConfig::rabi_mhz));
    v.push_back(real("gamma1_per_us", &RunConfig::gamma1_per_us));
    v.push_back(real("g_mhz", &RunConfig::g_mhz));
    v.push_back(real("detuning_mhz", &RunConfig::detuning_mhz));
    v.push_back(real("gamma1_q0_per_us", &RunConfig::gamma1_q0_per_us));
    v.push_back(real("gamma1_q1_per_us", &RunConfig::gamma1_q1_per_us));
    v.push_back(real("hold_max_us", &RunConfig::hold_max_us));
    v.push_back(real("hold_step_us", &RunConfig::hold_step_us));
    v.push_back(choice("readout", &RunConfig::readout, {"direct", "phase-sweep", "shots"}));
    v.push_back(count("shots", &RunConfig::shots));
    v.push_back(count("phase_points", &RunConfig::phase_points));
    v.push_back(choice("preparation", &RunConfig::preparation, {"ideal", "gate"}));
    v.push_back(real("prep_idle_us", &RunConfig::prep_idle_us));
    v.push_back(real("swap_max_us", &RunConfig::swap_max_us));
    v.push_back(real("swap_step_ns", &RunConfig::swap_step_ns));
    v.push_back(real("tau_ns", &RunConfig::tau_ns));
    v.push_back(real("phi_rad", &RunConfig::phi_rad));
    v.push_back({"gamma_g_per_us",
                 [](RunConfig& c, std::string_view s) -> std::string {
                   double x = 0.0;
                   if (!read_number(s, x)) return "expected a number";
                   c.gamma_g_per_us = x;
                   return "";
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   if (!c.gamma_g_per_us) return std::nullopt;
                   return io::format_double(*c.gamma_g_per_us);
                 }});
    v.push_back({"depths",
                 [](RunConfig& c, std::string_view s) -> std::string {
                   c.depths.clear();
                   for (auto item : split_list(s)) {
                     std::size_t d = 0;
                     if (!read_unsigned(item, d)) return "expected a comma-separated list of integers";
                     c.depths.push_back(d);
                   }
                   return "";
                 },
                 [](const RunConfig& c) -> std::optional<std::string> { return join(c.depths); }});
    v.push_back(count("circuits", &RunConfig::circuits));
    v.push_back(count("xeb_shots", &RunConfig::xeb_shots));
    v.push_back(choice("gate_noise", &RunConfig::gate_noise, {"none", "lindblad", "stochastic"}));
    v.push_back(choice("sweep", &RunConfig::sweep, {"rate-power", "xeb-power", "xeb-tau", "xeb-g"}));
    v.push_back({"sweep_values",
                 [](RunConfig& c, std::string_view s) -> std::string {
                   c.sweep_values.clear();
                   for (auto item : split_list(s)) {
                     double x = 0.0;
                     if (!read_number(item, x)) return "expected a comma-separated list of numbers";
                     c.sweep_values.push_back(x);
                   }
                   return "";
                 },
                 [](const RunConfig& c) -> std::optional<std::string> { return join(c.sweep_values); }});
    v.push_back(choice("sweep_protocol", &RunConfig::sweep_protocol, {"dressed", "spinlock"}));
    v.push_back(choice("gamma_source", &RunConfig::gamma_source, {"analytic", "ensemble"}));
    v.push_back(choice("rate_fit", &RunConfig::rate_fit, {"free-offset", "zero-asymptote"}));
    v.push_back(real("psd_duration_us", &RunConfig::psd_duration_us));
    v.push_back(count("psd_segment", &RunConfig::psd_segment));
    v.push_back({"quick",
                 [](RunConfig& c, std::string_view s) -> std::string {
                   if (s == "true") c.quick = true;
                   else if (s == "false") c.quick = false;
                   else return "expected true or false";
                   return "";
                 },
                 [](const RunConfig& c) -> std::optional<std::string> {
                   return std::string(c.quick ? "true" : "false");
                 }});
    return v;
  }();
  return f;
}

const Field* find_field(std::string_view key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

// Whole multiple of dt, to a relative 1e-9.
bool on_grid(double t, double dt) {
  const double r = t / dt;
  return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, r);
}

void validate(const RunConfig& c, std::vector<std::string>& p) {
  auto need = [&p](bool ok, const std::string& msg) {
    if (!ok) p.push_back(msg);
  };
  need(c.n_traj >= 20, "n_traj must be >= 20");
  need(c.dt_ns > 0.0, "dt_ns must be > 0");
  need(c.psd_level_rad2_per_us >= 0.0, "psd_level_rad2_per_us must be >= 0");
  need(c.band_low_mhz >= 0.0, "band_low_mhz must be >= 0");
  need(c.band_low_mhz < c.band_high_mhz, "band_low_mhz must be below band_high_mhz");
  need(c.psd_multiplier >= 0.0, "psd_multiplier must be >= 0");
  need(c.rabi_mhz > 0.0, "rabi_mhz must be > 0");
  need(c.g_mhz > 0.0, "g_mhz must be > 0");
  need(c.gamma1_per_us >= 0.0, "gamma1_per_us must be >= 0");
  need(c.gamma1_q0_per_us >= 0.0, "gamma1_q0_per_us must be >= 0");
  need(c.gamma1_q1_per_us >= 0.0, "gamma1_q1_per_us must be >= 0");
  need(c.hold_step_us > 0.0, "hold_step_us must be > 0");
  need(c.hold_max_us >= 7.0 * c.hold_step_us, "hold_max_us must span at least 8 grid points");
  need(c.prep_idle_us >= 0.0, "prep_idle_us must be >= 0");
  need(c.shots > 0, "shots must be > 0");
  need(c.phase_points >= 8, "phase_points must be >= 8");
  need(c.swap_step_ns > 0.0, "swap_step_ns must be > 0");
  need(c.swap_max_us * 1e3 >= 7.0 * c.swap_step_ns, "swap_max_us must span at least 8 grid points");
  need(c.tau_ns > 0.0, "tau_ns must be > 0");
  need(std::isfinite(c.phi_rad), "phi_rad must be finite");
  if (c.gamma_g_per_us) need(*c.gamma_g_per_us >= 0.0, "gamma_g_per_us must be >= 0");
  need(c.depths.size() >= 3, "depths needs at least 3 values");
  for (std::size_t k = 1; k < c.depths.size(); ++k)
    if (c.depths[k] <= c.depths[k - 1]) {
      p.push_back("depths must increase");
      break;
    }
  need(c.circuits >= 20, "circuits must be >= 20");
  need(c.sweep_values.size() >= 4, "sweep_values needs at least 4 values");
  for (double v : c.sweep_values)
    if (!(v > 0.0)) {
      p.push_back("sweep_values must be > 0");
      break;
    }
  need(c.psd_duration_us > 0.0, "psd_duration_us must be > 0");
  need(c.psd_segment >= 16, "psd_segment must be >= 16");

  if (c.dt_ns > 0.0) {
    const double dt = units::us_from_ns(c.dt_ns);
    if (c.hold_step_us > 0.0) need(on_grid(c.hold_step_us, dt), "hold_step_us must be a multiple of dt_ns");
    need(on_grid(c.prep_idle_us, dt), "prep_idle_us must be a multiple of dt_ns");
    if (c.gate_noise == "stochastic" && c.tau_ns > 0.0)
      need(on_grid(c.tau_ns, c.dt_ns), "tau_ns must be a multiple of dt_ns for stochastic gate noise");
    if (c.psd_duration_us > 0.0)
      need(c.psd_duration_us / dt >= 2.0 * static_cast<double>(c.psd_segment),
           "psd_duration_us must hold at least two psd_segment windows");
  }
}

InternalUnits derive(const RunConfig& c) {
  InternalUnits u;
  u.dt = units::us_from_ns(c.dt_ns);
  u.band_low = units::angular_from_mhz(c.band_low_mhz);
  u.band_high = units::angular_from_mhz(c.band_high_mhz);
  u.rabi = units::angular_from_mhz(c.rabi_mhz);
  u.g = units::angular_from_mhz(c.g_mhz);
  u.detuning = units::angular_from_mhz(c.detuning_mhz);
  u.tau = units::us_from_ns(c.tau_ns);
  u.swap_step = units::us_from_ns(c.swap_step_ns);
  for (double v : c.sweep_values) {
    if (c.sweep == "xeb-tau") u.sweep_values.push_back(units::us_from_ns(v));
    else if (c.sweep == "xeb-g") u.sweep_values.push_back(units::angular_from_mhz(0.5 * v));
    else u.sweep_values.push_back(v);
  }
  return u;
}

}  // namespace

std::string_view to_string(Scenario s) {
  for (const auto& [sc, name] : kScenarioNames)
    if (sc == s) return name;
  return "unknown";
}

std::optional<Scenario> scenario_from_string(std::string_view name) {
  for (const auto& [sc, n] : kScenarioNames)
    if (n == name) return sc;
  return std::nullopt;
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::invalid_argument([&] {
        std::string msg = "invalid configuration:";
        for (const auto& p : problems) msg += "\n  " + p;
        return msg;
      }()),
      problems_(std::move(problems)) {}

RunConfig parse_config(std::istream& in, std::optional<Scenario> scenario) {
  RunConfig c;
  std::vector<std::string> problems;
  std::set<std::string, std::less<>> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = line;
    if (const auto h = s.find('#'); h != std::string_view::npos) s = s.substr(0, h);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) {
      problems.push_back(where + "expected key = value");
      continue;
    }
    const std::string key(trim(s.substr(0, eq)));
    const std::string_view value = trim(s.substr(eq + 1));
    const Field* f = find_field(key);
    if (!f) {
      problems.push_back(where + "unknown key '" + key + "'");
      continue;
    }
    if (!seen.insert(key).second) {
      problems.push_back(where + "duplicate key '" + key + "'");
      continue;
    }
    if (const std::string err = f->set(c, value); !err.empty())
      problems.push_back(where + key + ": " + err);
  }

  if (scenario) {
    if (seen.contains("scenario") && c.scenario != *scenario)
      problems.push_back("scenario in file (" + std::string(to_string(c.scenario)) +
                         ") does not match the requested " + std::string(to_string(*scenario)));
    c.scenario = *scenario;
  } else if (!seen.contains("scenario")) {
    problems.push_back("missing required key 'scenario'");
  }

  // Scenario-dependent defaults.
  if (!seen.contains("g_mhz") &&
      (c.scenario == Scenario::kSwapCal || c.scenario == Scenario::kGateError ||
       c.scenario == Scenario::kXeb || (c.scenario == Scenario::kSweep && c.sweep != "rate-power")))
    c.g_mhz = 7.69;
  // Out of band the free-offset fit chases the sub-grid dressing transient.
  if (!seen.contains("rate_fit") && c.scenario == Scenario::kSweep && c.sweep == "xeb-g")
    c.rate_fit = "zero-asymptote";
  if (!seen.contains("sweep_values")) {
    if (c.sweep == "xeb-tau") c.sweep_values = {24.0, 48.0, 72.0, 96.0};
    else if (c.sweep == "xeb-g") c.sweep_values = {2.0, 10.0, 15.0, 19.0, 30.0};
  }

  validate(c, problems);
  if (!problems.empty()) throw ConfigError(std::move(problems));
  c.internal = derive(c);
  return c;
}

RunConfig parse_config_text(std::string_view text, std::optional<Scenario> scenario) {
  std::istringstream in{std::string(text)};
  return parse_config(in, scenario);
}

RunConfig parse_config_file(const std::string& path, std::optional<Scenario> scenario) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
  return parse_config(in, scenario);
}

RunConfig default_config(Scenario scenario) { return parse_config_text("", scenario); }

void write_config(std::ostream& out, const RunConfig& config) {
  for (const auto& f : fields())
    if (const auto v = f.get(config)) out << f.key << " = " << *v << '\n';
}

void apply_quick(RunConfig& c) {
  c.quick = true;
  c.n_traj = std::max<std::size_t>(20, c.n_traj / 10);
  c.circuits = 20;
  c.shots = std::max<std::size_t>(100, c.shots / 10);
  c.psd_duration_us = std::max(c.psd_duration_us / 10.0,
                               2.0 * static_cast<double>(c.psd_segment) * c.internal.dt);
  // Coarser hold grid while keeping at least 8 points on the dt grid.
  if (c.hold_max_us >= 7.0 * 4.0 * c.hold_step_us) c.hold_step_us *= 4.0;
}

}  // namespace dressed::cli
