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

// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. `--criterion N` (repeatable) restricts the run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dressed/cli/config.hpp"
#include "dressed/cli/run.hpp"
#include "dressed/dynamics.hpp"
#include "dressed/experiments.hpp"
#include "dressed/gate_error.hpp"
#include "dressed/models.hpp"
#include "dressed/noise.hpp"

namespace {

using namespace dressed;
namespace fs = std::filesystem;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

noise::NoiseSpectrum passband(double level) {
  return noise::NoiseSpectrum::flat_band(kTwoPi * 5.0, kTwoPi * 20.0, level);
}

models::CoupledPair pair_at(double g) {
  models::CoupledPair m;
  m.g = g;
  return m;
}

experiments::DressedOptions relax_options(std::size_t n_traj) {
  experiments::DressedOptions o;
  o.durations = experiments::uniform_grid(0.0, 40.0, 0.5);
  o.n_traj = n_traj;
  o.seed = 1;
  return o;
}

// Criteria 1 and 2 share the dressed-relaxation run.
const experiments::ProtocolResult& dressed_run() {
  static const experiments::ProtocolResult r =
      experiments::run_dressed_relaxation(pair_at(kTwoPi * 7.5), passband(0.2), relax_options(400));
  return r;
}

Verdict gamma_g_law() {
  const auto& r = dressed_run();
  const double rel = r.rate / 0.1 - 1.0;
  return {std::abs(rel) <= 0.10,
          fmt("rate %.5f +- %.5f /us vs 0.100 (analytic %.5f), deviation %+.1f%%", r.rate,
              r.rate_stderr, r.analytic_rate, 100.0 * rel)};
}

Verdict spin_lock_equivalence() {
  const auto& dr = dressed_run();
  experiments::ProtocolOptions o;
  o.durations = experiments::uniform_grid(0.0, 40.0, 0.5);
  o.n_traj = 400;
  o.seed = 2;
  const auto sl = experiments::run_spin_locking({kTwoPi * 15.0, 0.0}, passband(0.2), o);
  const double sigma = std::hypot(dr.rate_stderr, sl.rate_stderr);
  const double diff = std::abs(sl.rate - dr.rate);
  return {diff <= 2.0 * sigma,
          fmt("spin-lock %.5f +- %.5f, dressed %.5f +- %.5f, |diff| = %.2f sigma", sl.rate,
              sl.rate_stderr, dr.rate, dr.rate_stderr, diff / sigma)};
}

Verdict triad_decomposition() {
  models::CoupledPair m = pair_at(kTwoPi * 7.5);
  m.gamma1_q0 = 0.01;
  m.gamma1_q1 = 0.02;
  const auto r = experiments::run_triad_relaxation(m, 0.10, experiments::uniform_grid(0.0, 40.0, 0.5),
                                                   0.002);
  const double rel = r.total_rate / 0.115 - 1.0;
  return {std::abs(rel) <= 0.01, fmt("fitted %.6f /us vs 0.115, deviation %+.3f%%", r.total_rate,
                                     100.0 * rel)};
}

Verdict error_formulas() {
  bool ok = true;
  std::string detail;
  const double tau = 0.048;
  for (double x : {0.005, 0.01, 0.02}) {
    const auto rep = gate_error::channel_errors(gate_error::fsim_from_evolution(kTwoPi * 7.69, tau),
                                                x / tau);
    const double err = std::abs(rep.eps_avg_channel - x / 5.0);
    const double ratio = rep.eps_pauli_channel / rep.eps_avg_channel;
    ok = ok && err <= x * x && std::abs(ratio - 1.25) <= 1e-3;
    detail += fmt("%sG*tau=%.3f: eps_avg %.4e (|d| %.1e), ratio %.5f", detail.empty() ? "" : "; ", x,
                  rep.eps_avg_channel, err, ratio);
  }
  return {ok, detail};
}

gate_error::ScanBase xeb_base(double g) {
  gate_error::ScanBase b(passband(0.2));
  b.g = g;
  b.tau = 0.048;
  b.noise_kind = gate_error::GateNoise::Kind::kLindblad;
  b.xeb.depths = {1, 2, 4, 8, 16};
  b.xeb.circuit_count = 30;
  b.xeb.seed = 1;
  return b;
}

Verdict xeb_recovery() {
  const auto t = gate_error::tau_sweep(xeb_base(kTwoPi * 7.69), {0.024, 0.048, 0.072, 0.096});
  bool ok = t.fit && t.fit->r_squared > 0.98;
  std::string detail;
  for (const auto& p : t.points) {
    const double want = p.gamma_g * p.value / 4.0;
    const double rel = p.delta_eps / want - 1.0;
    ok = ok && std::abs(rel) <= 0.15;
    detail += fmt("tau %.0f ns: %.3e (%+.1f%%); ", 1e3 * p.value, p.delta_eps, 100.0 * rel);
  }
  detail += fmt("R^2 %.5f", t.fit ? t.fit->r_squared : 0.0);
  return {ok, detail};
}

Verdict passband_selectivity() {
  auto base = xeb_base(0.0);
  base.gamma_source = gate_error::GammaSource::kEnsembleFit;
  base.relaxation = relax_options(1000);
  base.relaxation.decay_model = experiments::DecayModel::kZeroAsymptote;
  const std::vector<double> two_g{2.0, 10.0, 15.0, 19.0, 30.0};
  std::vector<double> g;
  for (double f : two_g) g.push_back(kTwoPi * f / 2.0);
  const auto t = gate_error::g_sweep(base, g);
  bool ok = true;
  std::string detail;
  double mid_sum = 0.0;
  for (const auto& p : t.points) {
    const bool mid = p.value > 5.0 && p.value < 20.0;
    const double rel = p.analytic > 0.0 ? p.delta_eps / p.analytic - 1.0 : 0.0;
    if (mid) {
      ok = ok && std::abs(rel) <= 0.15;
      mid_sum += p.delta_eps;
    }
    detail += fmt("%g MHz: %.3e", p.value, p.delta_eps);
    detail += mid ? fmt(" (%+.1f%%); ", 100.0 * rel) : std::string("; ");
  }
  const double mid_mean = mid_sum / 3.0;
  const double outside = t.points.back().delta_eps;
  ok = ok && outside <= 0.10 * mid_mean;
  detail += fmt("30 MHz / mid-band = %.3f", outside / mid_mean);
  return {ok, detail};
}

Verdict swap_calibration() {
  const auto r = experiments::run_swap_calibration(pair_at(kTwoPi * 7.69),
                                                   experiments::uniform_grid(0.0, 0.4, 0.002), 0.002);
  const double rel = r.f_swap_mhz / 15.38 - 1.0;
  return {r.fit.converged() && std::abs(rel) <= 0.005,
          fmt("f_swap %.5f MHz vs 15.38, deviation %+.3f%%", r.f_swap_mhz, 100.0 * rel)};
}

Verdict power_linearity() {
  const auto base = passband(0.2);
  const auto scan = experiments::rate_vs_power_scan(
      [&](double m, std::size_t i) {
        // Four points leave two degrees of freedom, so R^2 > 0.99 needs
        // per-point errors near 4%.
        auto o = relax_options(1600);
        o.stream_offset = i;
        const auto r = experiments::run_dressed_relaxation(pair_at(kTwoPi * 7.5), base.scaled(m), o);
        return experiments::ScanPoint{m, r.rate, r.rate_stderr, r.analytic_rate};
      },
      {1.0, 2.0, 3.0, 5.0});
  const auto& f = scan.fit;
  std::string detail;
  for (const auto& p : scan.points)
    detail += fmt("x%g: %.4f +- %.4f; ", p.multiplier, p.rate, p.rate_stderr);
  detail += fmt("slope %.5f, intercept %.5f +- %.5f, R^2 %.5f", f.slope, f.intercept,
                f.intercept_stderr, f.r_squared);
  return {f.r_squared > 0.99 && std::abs(f.intercept) <= 2.0 * f.intercept_stderr, detail};
}

Verdict calibration_arithmetic() {
  const double p = noise::output_power(0.2203, 50.0);
  bool ok = std::abs(p - 9.706e-4) <= 0.5e-7;
  noise::PowerCalibration cal;
  cal.chain_factor = std::pow(10.0, -1.63);
  cal.freq_sensitivity_hz_per_v = 1.9e9;
  bool monotone = true, decibel = true;
  double prev = 0.0;
  for (int dbm = -120; dbm <= 0; ++dbm) {
    const double s = noise::psd_from_analyzer(dbm, cal);
    monotone = monotone && s > prev;
    prev = s;
    const double up = noise::psd_from_analyzer(dbm + 10.0, cal);
    decibel = decibel && std::abs(up / s - 10.0) <= 1e-12 * 10.0;
  }
  ok = ok && monotone && decibel;
  return {ok, fmt("P_out %.4e W; monotone %s; +10 dB -> x10 %s", p, monotone ? "yes" : "no",
                  decibel ? "yes" : "no")};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict numerics_hygiene() {
  // Trace preservation: swap with relaxation and the dressed triad over long holds.
  double drift = 0.0;
  {
    models::CoupledPair m = pair_at(kTwoPi * 7.69);
    m.gamma1_q0 = 0.01;
    m.gamma1_q1 = 0.02;
    dynamics::EvolveOptions eo;
    eo.keep_states = false;
    eo.record_times = experiments::uniform_grid(0.0, 10.0, 0.01);
    const auto a = dynamics::evolve_lindblad(models::build_single_excitation_with_ground(m),
                                             DensityMatrix::from_pure(StateVector::basis(3, 0)),
                                             10.0, 0.0004, eo);
    const auto b = dynamics::evolve_lindblad(models::build_dressed_triad(m, 0.1),
                                             DensityMatrix::from_pure(StateVector::basis(3, 0)),
                                             10.0, 0.0004, eo);
    drift = std::max(a.max_trace_drift, b.max_trace_drift);
  }
  // Unitarity of a long noisy propagator and of the gate unitaries.
  double unitarity = 0.0;
  {
    const auto spec = models::build_single_excitation(pair_at(kTwoPi * 7.5));
    const auto traj = noise::synthesize(passband(1.0), 400.0, 0.002, {3, 7}, 20000);
    const auto u = dynamics::noisy_propagator(spec, traj, 40.0);
    unitarity = max_abs_diff(u.adjoint() * u, ComplexMatrix::identity(u.rows()));
    const auto gate = gate_error::fsim_from_evolution(kTwoPi * 7.69, 0.048, kTwoPi * 2.0).unitary();
    unitarity = std::max(unitarity, max_abs_diff(gate.adjoint() * gate, ComplexMatrix::identity(4)));
  }
  // Byte-identical reruns of the CLI scenarios.
  bool identical = true;
  std::size_t compared = 0;
  const fs::path root = fs::temp_directory_path() / "dressed_acceptance_rerun";
  for (auto s : {cli::Scenario::kDressedRelax, cli::Scenario::kSwapCal, cli::Scenario::kXeb,
                 cli::Scenario::kPsd}) {
    auto c = cli::default_config(s);
    c.seed = 42;
    cli::apply_quick(c);
    fs::remove_all(root);
    const auto ra = cli::run_scenario(c, (root / "a").string());
    const auto rb = cli::run_scenario(c, (root / "b").string());
    identical = identical && ra.files == rb.files;
    for (const auto& f : ra.files) {
      if (f == "manifest.txt") continue;
      identical = identical && slurp(root / "a" / f) == slurp(root / "b" / f);
      ++compared;
    }
  }
  fs::remove_all(root);
  return {drift <= 1e-8 && unitarity <= 1e-10 && identical && compared > 0,
          fmt("trace drift %.2e; unitarity %.2e; %zu result files byte-identical: %s", drift,
              unitarity, compared, identical ? "yes" : "no")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  app.add_option("--criterion", only, "Run only these criteria (1-10)");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> all{
      {1, "gamma_g_law", gamma_g_law},
      {2, "spin_lock_equivalence", spin_lock_equivalence},
      {3, "triad_decomposition", triad_decomposition},
      {4, "error_formulas", error_formulas},
      {5, "xeb_recovery", xeb_recovery},
      {6, "passband_selectivity", passband_selectivity},
      {7, "swap_calibration", swap_calibration},
      {8, "power_linearity", power_linearity},
      {9, "calibration_arithmetic", calibration_arithmetic},
      {10, "numerics_hygiene", numerics_hygiene},
  };
  const std::set<int> wanted(only.begin(), only.end());
  int failures = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.contains(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!v.pass) ++failures;
    std::printf("%s [%d] %s: %s (%.1f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
