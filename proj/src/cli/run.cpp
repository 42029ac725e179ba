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

#include "dressed/cli/run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "dressed/dynamics.hpp"
#include "dressed/experiments.hpp"
#include "dressed/gate_error.hpp"
#include "dressed/io.hpp"
#include "dressed/kernels/kernels.hpp"
#include "dressed/models.hpp"
#include "dressed/noise.hpp"
#include "dressed/units.hpp"

#ifndef DRESSED_VERSION
#define DRESSED_VERSION "unknown"
#endif

namespace dressed::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    files_.push_back(name);
    return out;
  }

  void write_json(const std::string& name, const json& j) { open(name) << j.dump(2) << '\n'; }

  const std::vector<std::string>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

noise::NoiseSpectrum spectrum_of(const RunConfig& c) {
  return noise::NoiseSpectrum::flat_band(c.internal.band_low, c.internal.band_high,
                                         c.psd_level_rad2_per_us * c.psd_multiplier);
}

models::CoupledPair pair_of(const RunConfig& c, double g) {
  models::CoupledPair p;
  p.g = g;
  p.omega1 = 0.5 * c.internal.detuning;
  p.omega2 = -0.5 * c.internal.detuning;
  p.gamma1_q0 = c.gamma1_q0_per_us;
  p.gamma1_q1 = c.gamma1_q1_per_us;
  return p;
}

void fill_protocol(experiments::ProtocolOptions& o, const RunConfig& c) {
  o.durations = experiments::uniform_grid(0.0, c.hold_max_us, c.hold_step_us);
  o.n_traj = c.n_traj;
  o.seed = c.seed;
  o.dt = c.internal.dt;
  o.decay_model = c.rate_fit == "zero-asymptote" ? experiments::DecayModel::kZeroAsymptote
                                                 : experiments::DecayModel::kFreeOffset;
  o.threads = c.threads;
}

experiments::DressedOptions dressed_options(const RunConfig& c) {
  experiments::DressedOptions o;
  fill_protocol(o, c);
  if (c.readout == "phase-sweep") o.readout = experiments::Readout::kPhaseSweep;
  else if (c.readout == "shots") o.readout = experiments::Readout::kShots;
  o.shots = c.shots;
  o.phase_points = c.phase_points;
  o.preparation = c.preparation == "gate" ? experiments::Preparation::kGateComposed
                                          : experiments::Preparation::kIdeal;
  o.prep_idle = c.prep_idle_us;
  return o;
}

json fit_json(const fitting::DecayFit& f) {
  return {{"rate_per_us", f.rate},
          {"rate_stderr_per_us", f.rate_stderr},
          {"amplitude", f.amplitude},
          {"offset", f.offset},
          {"residual_rms", f.residual_rms},
          {"status", std::string(fitting::to_string(f.status))}};
}

json linear_json(const fitting::LinearFit& f) {
  return {{"slope", f.slope},
          {"slope_stderr", f.slope_stderr},
          {"intercept", f.intercept},
          {"intercept_stderr", f.intercept_stderr},
          {"r_squared", f.r_squared},
          {"points", f.n}};
}

json protocol_json(const experiments::ProtocolResult& r) {
  return {{"observable", r.observable},
          {"rate", r.rate},
          {"rate_stderr", r.rate_stderr},
          {"baseline_rate", r.baseline_rate},
          {"total_rate", r.total_rate},
          {"analytic_rate", r.analytic_rate},
          {"noise_power", r.noise_level},
          {"noise_variance_rad2_per_us2", r.noise_variance},
          {"units", "rates in 1/us, noise_power in rad^2/us (two-sided)"},
          {"n_traj", r.n_traj},
          {"seed", r.seed},
          {"fit", fit_json(r.fit)},
          {"baseline_fit", fit_json(r.baseline_fit)}};
}

void run_psd(const RunConfig& c, Writer& w) {
  const auto spec = spectrum_of(c);
  const auto traj = noise::synthesize(spec, c.psd_duration_us, c.internal.dt, {c.seed, 0});
  const auto est = noise::estimate_psd(traj, c.psd_segment);
  {
    auto out = w.open("psd.csv");
    out << "omega_rad_per_us,psd_estimate_rad2_per_us,psd_target_rad2_per_us\n";
    for (const auto& p : est.table())
      out << io::format_double(p.omega) << ',' << io::format_double(p.psd) << ','
          << io::format_double(spec(p.omega)) << '\n';
  }
  double var = 0.0;
  for (double x : traj.samples) var += x * x;
  var /= static_cast<double>(traj.samples.size());
  double in_band = 0.0;
  std::size_t n_in = 0;
  for (const auto& p : est.table())
    if (p.omega > spec.band_low() && p.omega < spec.band_high()) {
      in_band += p.psd;
      ++n_in;
    }
  w.write_json("psd.json", {{"level_rad2_per_us", spec.level()},
                            {"band_low_rad_per_us", spec.band_low()},
                            {"band_high_rad_per_us", spec.band_high()},
                            {"variance_target_rad2_per_us2", spec.variance()},
                            {"variance_measured_rad2_per_us2", var},
                            {"mean_in_band_estimate_rad2_per_us", n_in ? in_band / n_in : 0.0},
                            {"samples", traj.samples.size()},
                            {"segment", c.psd_segment},
                            {"seed", c.seed}});
}

void run_spinlock(const RunConfig& c, Writer& w) {
  models::DrivenQubit q;
  q.rabi = c.internal.rabi;
  q.gamma1 = c.gamma1_per_us;
  experiments::ProtocolOptions o;
  fill_protocol(o, c);
  const auto r = experiments::run_spin_locking(q, spectrum_of(c), o);
  auto out = w.open("spinlock.csv");
  experiments::write_protocol_csv(out, r);
  w.write_json("spinlock.json", protocol_json(r));
}

void run_dressed(const RunConfig& c, Writer& w) {
  const auto r = experiments::run_dressed_relaxation(pair_of(c, c.internal.g), spectrum_of(c),
                                                     dressed_options(c));
  auto out = w.open("dressed_relax.csv");
  experiments::write_protocol_csv(out, r);
  w.write_json("dressed_relax.json", protocol_json(r));
}

void run_swap(const RunConfig& c, Writer& w) {
  const auto pair = pair_of(c, c.internal.g);
  const auto spec = models::build_single_excitation(pair);
  const double step = c.internal.swap_step;
  const double dt = step / std::ceil(step / dynamics::max_lindblad_step(spec));
  const auto r = experiments::run_swap_calibration(
      pair, experiments::uniform_grid(0.0, c.swap_max_us, step), dt);
  {
    auto out = w.open("swap_cal.csv");
    out << "t_us,p01\n";
    for (std::size_t i = 0; i < r.durations.size(); ++i)
      out << io::format_double(r.durations[i]) << ',' << io::format_double(r.p01[i]) << '\n';
  }
  w.write_json("swap_cal.json", {{"f_swap_mhz", r.f_swap_mhz},
                                 {"f_swap_stderr_mhz", r.fit.frequency_stderr},
                                 {"g_inferred_mhz", units::mhz_from_angular(r.g_inferred)},
                                 {"g_set_mhz", c.g_mhz},
                                 {"decay_time_us", std::isfinite(r.fit.decay_time) ? json(r.fit.decay_time) : json(nullptr)},
                                 {"status", std::string(fitting::to_string(r.fit.status))}});
}

gate_error::FsimGate gate_of(const RunConfig& c, double tau) {
  auto gate = gate_error::fsim_from_evolution(c.internal.g, tau, c.internal.detuning);
  gate.phi = c.phi_rad;
  return gate;
}

double gamma_g_of(const RunConfig& c) {
  return c.gamma_g_per_us ? *c.gamma_g_per_us : models::gamma_g_analytic(spectrum_of(c), c.internal.g);
}

gate_error::GateNoise gate_noise_of(const RunConfig& c) {
  if (c.gate_noise == "none") return gate_error::GateNoise::none();
  if (c.gate_noise == "stochastic")
    return gate_error::GateNoise::stochastic(spectrum_of(c), c.n_traj, c.internal.dt);
  return gate_error::GateNoise::lindblad(gamma_g_of(c));
}

gate_error::XebOptions xeb_options(const RunConfig& c) {
  gate_error::XebOptions o;
  o.depths = c.depths;
  o.circuit_count = c.circuits;
  o.seed = c.seed;
  o.shots = c.xeb_shots;
  o.threads = c.threads;
  return o;
}

void run_gate_error(const RunConfig& c, Writer& w) {
  const auto gate = gate_of(c, c.internal.tau);
  const double gamma_g = gamma_g_of(c);
  const auto rep = gate_error::channel_errors(gate, gamma_g);
  const auto x = gate_error::xeb_delta(gate, gate_noise_of(c), xeb_options(c));
  w.write_json("gate_error.json", {{"theta", gate.theta},
                                   {"phi", gate.phi},
                                   {"tau_us", gate.tau},
                                   {"gamma_g_per_us", gamma_g},
                                   {"eps_avg_analytic", rep.eps_avg_analytic},
                                   {"eps_pauli_analytic", rep.eps_pauli_analytic},
                                   {"eps_avg_channel", rep.eps_avg_channel},
                                   {"eps_pauli_channel", rep.eps_pauli_channel},
                                   {"xeb_eps", x.delta_eps},
                                   {"xeb_stderr", x.delta_stderr},
                                   {"xeb_gate_noise", c.gate_noise},
                                   {"beyond_weak_noise", rep.beyond_weak_noise},
                                   {"notes", rep.notes}});
}

void run_xeb_scenario(const RunConfig& c, Writer& w) {
  const auto gate = gate_of(c, c.internal.tau);
  const auto x = gate_error::xeb_delta(gate, gate_noise_of(c), xeb_options(c));
  {
    auto out = w.open("xeb.csv");
    out << "depth,fidelity,stderr,fidelity_baseline,stderr_baseline\n";
    for (std::size_t k = 0; k < x.noisy.depths.size(); ++k)
      out << x.noisy.depths[k] << ',' << io::format_double(x.noisy.fidelities[k]) << ','
          << io::format_double(x.noisy.fidelity_stderrs[k]) << ','
          << io::format_double(x.baseline.fidelities[k]) << ','
          << io::format_double(x.baseline.fidelity_stderrs[k]) << '\n';
  }
  w.write_json("xeb.json", {{"tau_us", gate.tau},
                            {"theta", gate.theta},
                            {"gate_noise", c.gate_noise},
                            {"gamma_g_per_us", c.gate_noise == "lindblad" ? gamma_g_of(c) : 0.0},
                            {"decay", x.noisy.decay},
                            {"amplitude", x.noisy.amplitude},
                            {"per_cycle_pauli_error", x.noisy.per_cycle_pauli_error},
                            {"per_cycle_pauli_stderr", x.noisy.per_cycle_pauli_stderr},
                            {"baseline_pauli_error", x.baseline.per_cycle_pauli_error},
                            {"delta_eps", x.delta_eps},
                            {"delta_stderr", x.delta_stderr},
                            {"analytic_delta_eps", gamma_g_of(c) * gate.tau / 4.0},
                            {"converged", x.noisy.converged && x.baseline.converged},
                            {"circuits", x.noisy.circuit_count},
                            {"seed", c.seed}});
}

void run_rate_power(const RunConfig& c, Writer& w) {
  const auto base = spectrum_of(c);
  const bool spin = c.sweep_protocol == "spinlock";
  auto runner = [&](double m, std::size_t i) {
    experiments::ScanPoint p;
    const auto spec = base.scaled(m);
    experiments::ProtocolResult r;
    if (spin) {
      models::DrivenQubit q;
      q.rabi = c.internal.rabi;
      q.gamma1 = c.gamma1_per_us;
      experiments::ProtocolOptions o;
      fill_protocol(o, c);
      o.stream_offset = i;
      r = experiments::run_spin_locking(q, spec, o);
    } else {
      auto o = dressed_options(c);
      o.stream_offset = i;
      r = experiments::run_dressed_relaxation(pair_of(c, c.internal.g), spec, o);
    }
    p.rate = r.rate;
    p.rate_stderr = r.rate_stderr;
    p.analytic_rate = r.analytic_rate;
    return p;
  };
  const auto scan = experiments::rate_vs_power_scan(runner, c.internal.sweep_values);
  {
    auto out = w.open("sweep.csv");
    out << "psd_multiplier,rate_per_us,stderr_per_us,analytic_per_us\n";
    for (const auto& p : scan.points)
      out << io::format_double(p.multiplier) << ',' << io::format_double(p.rate) << ','
          << io::format_double(p.rate_stderr) << ',' << io::format_double(p.analytic_rate) << '\n';
  }
  w.write_json("sweep.json", {{"sweep", c.sweep},
                              {"protocol", c.sweep_protocol},
                              {"fit", linear_json(scan.fit)},
                              {"units", "slope in 1/us per unit multiplier"},
                              {"base_psd_level_rad2_per_us", base.level()}});
}

void run_xeb_sweep(const RunConfig& c, Writer& w) {
  gate_error::ScanBase base(spectrum_of(c));
  base.g = c.internal.g;
  base.tau = c.internal.tau;
  base.noise_kind = c.gate_noise == "stochastic" ? gate_error::GateNoise::Kind::kStochastic
                                                 : gate_error::GateNoise::Kind::kLindblad;
  base.gamma_source = c.gamma_source == "ensemble" ? gate_error::GammaSource::kEnsembleFit
                                                   : gate_error::GammaSource::kAnalytic;
  base.relaxation = dressed_options(c);
  base.stochastic_traj = c.n_traj;
  base.stochastic_dt = c.internal.dt;
  base.xeb = xeb_options(c);
  gate_error::DeltaEpsTable t;
  if (c.sweep == "xeb-power") t = gate_error::power_sweep(base, c.internal.sweep_values);
  else if (c.sweep == "xeb-tau") t = gate_error::tau_sweep(base, c.internal.sweep_values);
  else t = gate_error::g_sweep(base, c.internal.sweep_values);
  {
    auto out = w.open("sweep.csv");
    gate_error::write_delta_eps_csv(out, t);
  }
  json j = {{"sweep", c.sweep}, {"variable", t.variable}, {"gate_noise", c.gate_noise},
            {"gamma_source", c.gamma_source}};
  j["fit"] = t.fit ? linear_json(*t.fit) : json(nullptr);
  w.write_json("sweep.json", j);
}

}  // namespace

RunOutput run_scenario(const RunConfig& config, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  Writer w{fs::path(out_dir)};
  switch (config.scenario) {
    case Scenario::kPsd: run_psd(config, w); break;
    case Scenario::kSpinLock: run_spinlock(config, w); break;
    case Scenario::kDressedRelax: run_dressed(config, w); break;
    case Scenario::kSwapCal: run_swap(config, w); break;
    case Scenario::kGateError: run_gate_error(config, w); break;
    case Scenario::kXeb: run_xeb_scenario(config, w); break;
    case Scenario::kSweep:
      if (config.sweep == "rate-power") run_rate_power(config, w);
      else run_xeb_sweep(config, w);
      break;
  }
  RunOutput result;
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  {
    std::ofstream m(w.dir() / "manifest.txt", std::ios::binary);
    if (!m) throw std::runtime_error("cannot write manifest.txt");
    m << "# dressedsim " << DRESSED_VERSION << '\n';
    m << "# kernels " << kernels::active().name << '\n';
    m << "# wall_time_s " << io::format_double(result.wall_seconds) << '\n';
    for (const auto& f : w.files()) m << "# output " << f << '\n';
    write_config(m, config);
  }
  result.files = w.files();
  result.files.push_back("manifest.txt");
  return result;
}

}  // namespace dressed::cli
