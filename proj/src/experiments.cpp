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

#include "dressed/experiments.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dressed/dynamics.hpp"
#include "dressed/rng.hpp"

namespace dressed::experiments {

namespace {

constexpr std::uint64_t kSpinLockTag = 1;
constexpr std::uint64_t kDressedTag = 2;
constexpr std::uint64_t kShotStream = 0x5307;

std::uint64_t tag_for(std::uint64_t protocol, std::uint64_t offset) {
  return protocol + (offset << 4);
}

void check_durations(const std::vector<double>& d, const char* what) {
  if (d.size() < 8) throw std::invalid_argument(std::string(what) + ": need at least 8 durations");
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] >= 0.0)) throw std::invalid_argument(std::string(what) + ": durations must be >= 0");
    if (i > 0 && !(d[i] > d[i - 1]))
      throw std::invalid_argument(std::string(what) + ": durations must increase");
  }
}

// Split n trajectories into contiguous groups for the jackknife.
std::vector<std::pair<std::size_t, std::size_t>> make_groups(std::size_t n, std::size_t wanted) {
  const std::size_t g = std::max<std::size_t>(2, std::min(wanted, n / 2));
  if (n < 2 * g) throw std::invalid_argument("protocol: need at least 4 trajectories");
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // (first, count)
  std::size_t first = 0;
  for (std::size_t k = 0; k < g; ++k) {
    const std::size_t count = n / g + (k < n % g ? 1 : 0);
    groups.push_back({first, count});
    first += count;
  }
  return groups;
}

// Lindblad step no larger than dt_max that divides dt_max evenly.
double fitting_step(const models::LindbladSpec& spec, double dt_max) {
  const double limit = dynamics::max_lindblad_step(spec);
  if (dt_max <= limit) return dt_max;
  return dt_max / std::ceil(dt_max / limit);
}

// Pure initial states relaxing toward a pure fixed point pick up RK4 eigenvalue
// undershoot of order (h*rate)^2; a sixteenth of the stability limit keeps it
// well under the positivity floor.
double pure_state_step(const models::LindbladSpec& spec, double dt_max) {
  const double limit = dynamics::max_lindblad_step(spec) / 16.0;
  if (dt_max <= limit) return dt_max;
  return dt_max / std::ceil(dt_max / limit);
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& y, DecayModel model) {
  return model == DecayModel::kZeroAsymptote ? fitting::fit_exponential_to_zero(t, y)
                                             : fitting::fit_exponential(t, y);
}

double rate_of(const DecayFit& f) {
  return f.status == fitting::FitStatus::kDegenerate ? 0.0 : f.rate;
}

double expectation(const ComplexMatrix& rho, const ComplexMatrix& op) {
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < rho.rows(); ++i)
    for (std::size_t j = 0; j < rho.cols(); ++j) acc += rho(i, j) * op(j, i);
  return acc.real();
}

// Per-group mean states at each record time, combined with weights, then
// mapped to a series by a readout.
struct GroupedStates {
  std::vector<std::size_t> sizes;
  std::vector<std::vector<ComplexMatrix>> states;  // [group][time]

  std::vector<ComplexMatrix> combine(std::size_t skip) const {
    const std::size_t n_t = states.front().size();
    const std::size_t d = states.front().front().rows();
    std::vector<ComplexMatrix> out(n_t, ComplexMatrix(d, d));
    double total = 0.0;
    for (std::size_t g = 0; g < sizes.size(); ++g) {
      if (g == skip) continue;
      total += static_cast<double>(sizes[g]);
      for (std::size_t t = 0; t < n_t; ++t) out[t] += states[g][t] * cplx{static_cast<double>(sizes[g]), 0.0};
    }
    for (auto& m : out) m *= cplx{1.0 / total, 0.0};
    return out;
  }
};

GroupedStates run_groups(const models::LindbladSpec& spec, const noise::NoiseSpectrum& noise,
                         const DensityMatrix& rho0, const ProtocolOptions& opt,
                         std::uint64_t tag, double idle, bool gate_noise) {
  const auto groups = make_groups(opt.n_traj, opt.jackknife_groups);
  GroupedStates gs;
  for (const auto& [first, count] : groups) {
    dynamics::EnsembleOptions eo;
    eo.n_traj = count;
    eo.seed = opt.seed;
    eo.stream_tag = tag;
    eo.first_index = first;
    eo.dt = opt.dt;
    eo.record_times = opt.durations;
    eo.keep_mean_states = true;
    eo.threads = opt.threads;
    eo.idle_before = idle;
    eo.gate_noise = gate_noise;
    auto res = dynamics::ensemble_relaxation(spec, noise, rho0, opt.durations.back(), eo);
    gs.sizes.push_back(count);
    gs.states.push_back(std::move(res.mean_states));
  }
  return gs;
}

// Fits the full-data series and each leave-one-group-out series.
void finish(ProtocolResult& r, const std::vector<double>& full,
            const std::vector<std::vector<double>>& loo, DecayModel model) {
  r.values = full;
  r.stderrs.assign(full.size(), 0.0);
  std::vector<double> col(loo.size());
  for (std::size_t t = 0; t < full.size(); ++t) {
    for (std::size_t g = 0; g < loo.size(); ++g) col[g] = loo[g][t];
    r.stderrs[t] = fitting::jackknife_stderr(col);
  }
  r.fit = fit_decay(r.durations, full, model);
  r.total_rate = rate_of(r.fit);
  r.rate = r.total_rate - r.baseline_rate;
  std::vector<double> rates;
  for (const auto& s : loo) rates.push_back(rate_of(fit_decay(r.durations, s, model)));
  r.rate_stderr = fitting::jackknife_stderr(rates);
}

std::vector<double> read_direct(const std::vector<ComplexMatrix>& states, const ComplexMatrix& op) {
  std::vector<double> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(expectation(s, op));
  return out;
}

ComplexMatrix dressed_projector(std::size_t dim, bool plus) {
  ComplexMatrix p(dim, dim);
  const double s = plus ? 0.5 : -0.5;
  p(0, 0) = 0.5;
  p(1, 1) = 0.5;
  p(0, 1) = s;
  p(1, 0) = s;
  return p;
}

// Polarization estimated from `shots` projective dressed-basis measurements.
double sample_polarization(const ComplexMatrix& rho, std::size_t shots, RandomStream& rng) {
  const std::size_t d = rho.rows();
  const double p1 = expectation(rho, dressed_projector(d, true));
  const double p0 = expectation(rho, dressed_projector(d, false));
  long n1 = 0, n0 = 0;
  for (std::size_t s = 0; s < shots; ++s) {
    const double u = rng.uniform();
    if (u < p1) {
      ++n1;
    } else if (u < p1 + p0) {
      ++n0;
    }
  }
  return static_cast<double>(n1 - n0) / static_cast<double>(shots);
}

}  // namespace

std::vector<double> uniform_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) throw std::invalid_argument("uniform_grid: bad range");
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  std::vector<double> g(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g[k] = start + step * static_cast<double>(k);
  return g;
}

ComplexMatrix dressed_polarization_operator(std::size_t dim) {
  if (dim != 2 && dim != 3) throw DimensionError("dressed_polarization_operator: dim must be 2 or 3");
  ComplexMatrix p(dim, dim);
  p(0, 1) = 1.0;
  p(1, 0) = 1.0;
  return p;
}

std::vector<double> phase_grid(std::size_t points) {
  std::vector<double> th(points);
  for (std::size_t k = 0; k < points; ++k) th[k] = kTwoPi * static_cast<double>(k) / static_cast<double>(points);
  return th;
}

PhaseSweepResult phase_sweep_readout(const ComplexMatrix& rho, std::span<const double> thetas) {
  if (rho.rows() < 2 || !rho.is_square()) throw DimensionError("phase_sweep_readout: bad state");
  if (thetas.size() < 8) throw std::invalid_argument("phase_sweep_readout: need >= 8 phases");
  const cplx c01 = rho(0, 1);
  Eigen::MatrixXd design(thetas.size(), 3);
  Eigen::VectorXd signal(thetas.size());
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    design(kk, 0) = std::cos(thetas[k]);
    design(kk, 1) = std::sin(thetas[k]);
    design(kk, 2) = 1.0;
    signal(kk) = 2.0 * (c01 * std::polar(1.0, thetas[k])).real();
  }
  const Eigen::Vector3d coef = design.colPivHouseholderQr().solve(signal);
  PhaseSweepResult r;
  r.cos_amplitude = coef(0);
  r.sin_amplitude = coef(1);
  r.offset = coef(2);
  const double amp = std::hypot(coef(0), coef(1));
  if (amp < 1e-12) {
    r.degenerate = true;
    r.polarization = 0.0;
    return r;
  }
  r.polarization = coef(0) < 0.0 ? -amp : amp;
  return r;
}

ProtocolResult run_spin_locking(const models::DrivenQubit& model, const noise::NoiseSpectrum& noise,
                                const ProtocolOptions& opt) {
  check_durations(opt.durations, "run_spin_locking");
  if (!(model.rabi > 0.0)) throw std::invalid_argument("run_spin_locking: rabi must be > 0");
  const auto spec = models::build_driven_qubit(model);
  const DensityMatrix rho0 = DensityMatrix::from_pure(StateVector{1.0, 1.0});
  const ComplexMatrix sx = pauli::X();

  ProtocolResult r;
  r.observable = "polarization_x";
  r.durations = opt.durations;
  r.n_traj = opt.n_traj;
  r.seed = opt.seed;
  r.noise_level = noise.level();
  r.noise_variance = noise.variance();
  r.analytic_rate = 0.5 * noise(model.rabi);

  dynamics::EvolveOptions eo;
  eo.record_times = opt.durations;
  eo.observables = {{"x", sx}};
  eo.keep_states = false;
  const auto base = dynamics::evolve_lindblad(spec, rho0, opt.durations.back(),
                                              fitting_step(spec, opt.dt), eo);
  r.baseline_fit = fit_decay(opt.durations, base.series("x"), opt.decay_model);
  r.baseline_rate = rate_of(r.baseline_fit);

  const auto gs = run_groups(spec, noise, rho0, opt, tag_for(kSpinLockTag, opt.stream_offset), 0.0, true);
  const auto full = read_direct(gs.combine(gs.sizes.size()), sx);
  std::vector<std::vector<double>> loo;
  for (std::size_t g = 0; g < gs.sizes.size(); ++g) loo.push_back(read_direct(gs.combine(g), sx));
  finish(r, full, loo, opt.decay_model);
  return r;
}

ProtocolResult run_dressed_relaxation(const models::CoupledPair& model,
                                      const noise::NoiseSpectrum& noise, const DressedOptions& opt) {
  check_durations(opt.durations, "run_dressed_relaxation");
  model.validate();
  if (model.detuning() != 0.0)
    throw std::invalid_argument("run_dressed_relaxation: hold must be at resonance");
  const bool with_t1 = model.gamma1_q0 > 0.0 || model.gamma1_q1 > 0.0;
  const auto spec = with_t1 ? models::build_single_excitation_with_ground(model)
                            : models::build_single_excitation(model);
  const std::size_t d = spec.dim();

  // |1~> either directly or as X on qubit 0, sqrt(iSWAP), then S on qubit 1.
  std::vector<cplx> psi(d, cplx{0.0, 0.0});
  if (opt.preparation == Preparation::kIdeal) {
    psi[0] = psi[1] = 1.0 / std::sqrt(2.0);
  } else {
    const models::CoupledPair resonant{0.0, 0.0, model.g, 0.0, 0.0, model.noise_target};
    const auto h = models::build_single_excitation(resonant).hamiltonian;
    const ComplexMatrix u = hermitian_expm(h, kPi / (4.0 * model.g));
    psi[0] = u(0, 0);
    psi[1] = u(1, 0) * cplx{0.0, 1.0};
  }
  const DensityMatrix rho0 = DensityMatrix::from_pure(StateVector(psi));
  const ComplexMatrix pol = dressed_polarization_operator(d);
  const auto thetas = phase_grid(opt.phase_points);

  ProtocolResult r;
  r.observable = "dressed_polarization";
  r.durations = opt.durations;
  r.n_traj = opt.n_traj;
  r.seed = opt.seed;
  r.noise_level = noise.level();
  r.noise_variance = noise.variance();
  r.analytic_rate = models::gamma_g_analytic(noise, model.g);

  auto readout = [&](const std::vector<ComplexMatrix>& states) {
    if (opt.readout == Readout::kPhaseSweep) {
      std::vector<double> out;
      for (const auto& s : states) out.push_back(phase_sweep_readout(s, thetas).polarization);
      return out;
    }
    return read_direct(states, pol);
  };

  dynamics::EvolveOptions eo;
  eo.record_times = opt.durations;
  eo.keep_states = true;
  const auto base = dynamics::evolve_lindblad(spec, rho0, opt.durations.back(),
                                              fitting_step(spec, opt.dt), eo);
  std::vector<ComplexMatrix> base_states;
  for (const auto& s : base.states) base_states.push_back(s.matrix());
  r.baseline_fit = fit_decay(opt.durations, readout(base_states), opt.decay_model);
  r.baseline_rate = rate_of(r.baseline_fit);

  const auto gs = run_groups(spec, noise, rho0, opt, tag_for(kDressedTag, opt.stream_offset),
                             opt.prep_idle, opt.gate_noise);
  std::vector<double> full;
  std::vector<std::vector<double>> loo;
  if (opt.readout == Readout::kShots) {
    // Each group gets its share of the shots; estimates combine linearly.
    const std::size_t n_groups = gs.sizes.size();
    const std::size_t per_group = std::max<std::size_t>(1, opt.shots / n_groups);
    std::vector<std::vector<double>> est(n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) {
      for (std::size_t t = 0; t < opt.durations.size(); ++t) {
        RandomStream rng(opt.seed, {kShotStream, opt.stream_offset, g, t});
        est[g].push_back(sample_polarization(gs.states[g][t], per_group, rng));
      }
    }
    auto combine = [&](std::size_t skip) {
      std::vector<double> out(opt.durations.size(), 0.0);
      double total = 0.0;
      for (std::size_t g = 0; g < n_groups; ++g) {
        if (g == skip) continue;
        total += static_cast<double>(gs.sizes[g]);
        for (std::size_t t = 0; t < out.size(); ++t) out[t] += static_cast<double>(gs.sizes[g]) * est[g][t];
      }
      for (auto& v : out) v /= total;
      return out;
    };
    full = combine(n_groups);
    for (std::size_t g = 0; g < n_groups; ++g) loo.push_back(combine(g));
  } else {
    full = readout(gs.combine(gs.sizes.size()));
    for (std::size_t g = 0; g < gs.sizes.size(); ++g) loo.push_back(readout(gs.combine(g)));
  }
  finish(r, full, loo, opt.decay_model);
  return r;
}

ProtocolResult run_triad_relaxation(const models::CoupledPair& model, double gamma_g,
                                    const std::vector<double>& durations, double dt) {
  check_durations(durations, "run_triad_relaxation");
  const auto spec = models::build_dressed_triad(model, gamma_g);
  const DensityMatrix rho0 = DensityMatrix::from_pure(StateVector::basis(3, 0));
  dynamics::EvolveOptions eo;
  eo.record_times = durations;
  eo.observables = {{"pop_diff", ComplexMatrix::diagonal({1.0, -1.0, 0.0})}};
  eo.keep_states = false;
  const auto ev =
      dynamics::evolve_lindblad(spec, rho0, durations.back(), pure_state_step(spec, dt), eo);
  ProtocolResult r;
  r.observable = "population_difference";
  r.durations = durations;
  r.values = ev.series("pop_diff");
  r.stderrs.assign(r.values.size(), 0.0);
  r.fit = fitting::fit_exponential(durations, r.values);
  r.total_rate = r.fit.rate;
  r.rate = r.fit.rate;
  r.rate_stderr = r.fit.rate_stderr;
  r.analytic_rate = models::gamma_1g_analytic(model.gamma1_q0, model.gamma1_q1, gamma_g);
  return r;
}

SwapCalibration run_swap_calibration(const models::CoupledPair& model,
                                     const std::vector<double>& durations, double dt) {
  check_durations(durations, "run_swap_calibration");
  const bool with_t1 = model.gamma1_q0 > 0.0 || model.gamma1_q1 > 0.0;
  const auto spec = with_t1 ? models::build_single_excitation_with_ground(model)
                            : models::build_single_excitation(model);
  const std::size_t d = spec.dim();
  const DensityMatrix rho0 = DensityMatrix::from_pure(StateVector::basis(d, 0));
  dynamics::EvolveOptions eo;
  eo.record_times = durations;
  eo.observables = {{"p01", ComplexMatrix::basis_op(d, 1, 1)}};
  eo.keep_states = false;
  const auto ev =
      dynamics::evolve_lindblad(spec, rho0, durations.back(), pure_state_step(spec, dt), eo);
  SwapCalibration out;
  out.durations = durations;
  out.p01 = ev.series("p01");
  out.fit = fitting::fit_damped_sinusoid(durations, out.p01);
  out.f_swap_mhz = out.fit.frequency;
  out.g_inferred = kPi * out.fit.frequency;
  return out;
}

PowerScan rate_vs_power_scan(const std::function<ScanPoint(double, std::size_t)>& runner,
                             const std::vector<double>& multipliers) {
  if (multipliers.size() < 4)
    throw std::invalid_argument("rate_vs_power_scan: need at least 4 power points");
  PowerScan scan;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < multipliers.size(); ++i) {
    ScanPoint p = runner(multipliers[i], i);
    p.multiplier = multipliers[i];
    scan.points.push_back(p);
    if (std::isfinite(p.rate)) {
      x.push_back(p.multiplier);
      y.push_back(p.rate);
    }
  }
  if (x.size() < 3) throw std::runtime_error("rate_vs_power_scan: fewer than 3 valid points");
  scan.fit = fitting::linear_fit(x, y);
  return scan;
}

void write_protocol_csv(std::ostream& out, const ProtocolResult& r) {
  dynamics::write_series_csv(out, r.durations, r.observable, r.values, r.stderrs);
}

}  // namespace dressed::experiments
