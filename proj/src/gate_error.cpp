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

#include "dressed/gate_error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "dressed/dynamics.hpp"
#include "dressed/io.hpp"

namespace dressed::gate_error {

namespace {

constexpr std::uint64_t kCircuitTag = 0x7eb;
constexpr std::uint64_t kShotTag = 0x5407;
constexpr std::uint64_t kGateNoiseTag = 3;

// Computational-basis indices.
constexpr std::size_t k01 = 1;
constexpr std::size_t k10 = 2;
constexpr std::size_t k11 = 3;

bool finite(double x) { return std::isfinite(x); }

// Single-excitation vector a|10> + b|01> as a 4-vector.
std::vector<cplx> embed_excitation(cplx a10, cplx a01) {
  std::vector<cplx> v(kGateDim);
  v[k10] = a10;
  v[k01] = a01;
  return v;
}

ComplexMatrix outer(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  ComplexMatrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * std::conj(b[j]);
  return m;
}

std::vector<cplx> dressed_up() {
  const double r = 1.0 / std::sqrt(2.0);
  return embed_excitation(r, r);
}

std::vector<cplx> dressed_down() {
  const double r = 1.0 / std::sqrt(2.0);
  return embed_excitation(r, -r);
}

// Pooled numerator and denominator of the linear XEB estimator for one
// circuit at one depth.
struct XebTerms {
  double num = 0.0;
  double den = 0.0;
};

// [circuit][depth]
using XebTable = std::vector<std::vector<XebTerms>>;

std::vector<double> pooled(const XebTable& t, std::size_t n_depths, std::size_t skip) {
  std::vector<double> f(n_depths);
  for (std::size_t k = 0; k < n_depths; ++k) {
    double num = 0.0, den = 0.0;
    for (std::size_t c = 0; c < t.size(); ++c) {
      if (c == skip) continue;
      num += t[c][k].num;
      den += t[c][k].den;
    }
    f[k] = num / den;
  }
  return f;
}

ComplexMatrix layer(RandomStream& rng) {
  const ComplexMatrix u0 = haar_unitary_2(rng);
  const ComplexMatrix u1 = haar_unitary_2(rng);
  return kron(u0, u1);
}

XebTerms run_circuit(const ComplexMatrix& gate, const ComplexMatrix& superop, std::size_t depth,
                     std::uint64_t seed, std::size_t circuit, std::size_t shots) {
  constexpr std::size_t d = kGateDim;
  RandomStream rng(seed, {kCircuitTag, circuit, depth});
  std::vector<cplx> psi(d);
  psi[0] = 1.0;
  ComplexMatrix rho = ComplexMatrix::basis_op(d, 0, 0);
  for (std::size_t m = 0; m <= depth; ++m) {
    const ComplexMatrix l = layer(rng);
    psi = matvec(l, psi);
    rho = l * rho * l.adjoint();
    if (m == depth) break;
    psi = matvec(gate, psi);
    rho = unvectorize(matvec(superop, vectorize(rho)), d);
  }
  std::vector<double> p_ideal(d), p_noisy(d);
  for (std::size_t x = 0; x < d; ++x) {
    p_ideal[x] = std::norm(psi[x]);
    p_noisy[x] = std::max(0.0, rho(x, x).real());
  }
  if (shots > 0) {
    RandomStream srng(seed, {kShotTag, circuit, depth});
    std::vector<double> counts(d, 0.0);
    double total = 0.0;
    for (double p : p_noisy) total += p;
    for (std::size_t s = 0; s < shots; ++s) {
      double u = srng.uniform() * total;
      std::size_t x = 0;
      while (x + 1 < d && u >= p_noisy[x]) u -= p_noisy[x++];
      counts[x] += 1.0;
    }
    for (std::size_t x = 0; x < d; ++x) p_noisy[x] = counts[x] / static_cast<double>(shots);
  }
  XebTerms t;
  double cross = 0.0, self = 0.0;
  for (std::size_t x = 0; x < d; ++x) {
    cross += p_noisy[x] * p_ideal[x];
    self += p_ideal[x] * p_ideal[x];
  }
  t.num = static_cast<double>(d) * cross - 1.0;
  t.den = static_cast<double>(d) * self - 1.0;
  return t;
}

struct DecayEstimate {
  fitting::PowerDecayFit fit;
  double eps = 0.0;
};

DecayEstimate fit_decay(const std::vector<std::size_t>& depths, const std::vector<double>& f) {
  std::vector<double> x(depths.begin(), depths.end());
  DecayEstimate e;
  e.fit = fitting::fit_power_decay(x, f);
  e.eps = (1.0 - e.fit.p) * (1.0 - 1.0 / static_cast<double>(kGateDim * kGateDim));
  return e;
}

}  // namespace

ComplexMatrix fsim_matrix(double theta, double phi) {
  ComplexMatrix u(kGateDim, kGateDim);
  const double c = std::cos(theta), s = std::sin(theta);
  u(0, 0) = 1.0;
  u(k01, k01) = c;
  u(k01, k10) = cplx{0.0, -s};
  u(k10, k01) = cplx{0.0, -s};
  u(k10, k10) = c;
  u(k11, k11) = std::polar(1.0, -phi);
  return u;
}

void FsimGate::validate() const {
  if (!finite(theta) || !finite(phi) || !finite(detuning))
    throw std::invalid_argument("FsimGate: non-finite parameter");
  if (!(tau > 0.0) || !finite(tau)) throw std::invalid_argument("FsimGate: tau must be > 0");
}

ComplexMatrix FsimGate::unitary() const {
  if (detuning == 0.0) return fsim_matrix(theta, phi);
  validate();
  return hermitian_expm(gate_hamiltonian(*this), tau);
}

FsimGate fsim_from_evolution(double g, double tau, double detuning) {
  if (!(tau >= 0.0) || !finite(tau)) throw std::invalid_argument("fsim_from_evolution: tau must be >= 0");
  if (!finite(g) || !finite(detuning)) throw std::invalid_argument("fsim_from_evolution: non-finite input");
  FsimGate gate;
  gate.theta = g * tau;
  gate.tau = tau;
  gate.detuning = detuning;
  return gate;
}

ComplexMatrix gate_hamiltonian(const FsimGate& gate) {
  gate.validate();
  ComplexMatrix h(kGateDim, kGateDim);
  const double g = gate.theta / gate.tau;
  h(k01, k10) = g;
  h(k10, k01) = g;
  h(k11, k11) = gate.phi / gate.tau;
  h(k10, k10) = 0.5 * gate.detuning;
  h(k01, k01) = -0.5 * gate.detuning;
  return h;
}

ComplexMatrix gate_noise_operator() {
  ComplexMatrix n(kGateDim, kGateDim);
  n(k10, k10) = 0.5;
  n(k01, k01) = -0.5;
  return n;
}

ComplexMatrix dressed_raising() { return outer(dressed_up(), dressed_down()); }
ComplexMatrix dressed_lowering() { return outer(dressed_down(), dressed_up()); }

models::LindbladSpec gate_lindblad_spec(const FsimGate& gate, double gamma_g) {
  if (!(gamma_g >= 0.0) || !finite(gamma_g))
    throw std::invalid_argument("gate_lindblad_spec: gamma_g must be >= 0");
  models::LindbladSpec spec;
  spec.hamiltonian = gate_hamiltonian(gate);
  spec.jumps.push_back({0.5 * gamma_g, dressed_raising()});
  spec.jumps.push_back({0.5 * gamma_g, dressed_lowering()});
  return spec;
}

FirstOrderErrors first_order_errors(double gamma_g, double tau) {
  if (!(gamma_g >= 0.0) || !(tau >= 0.0) || !finite(gamma_g) || !finite(tau))
    throw std::invalid_argument("first_order_errors: gamma_g and tau must be >= 0");
  FirstOrderErrors e;
  const double x = gamma_g * tau;
  e.eps_avg = x / 5.0;
  e.eps_pauli = x / 4.0;
  e.beyond_weak_noise = x >= kWeakNoiseLimit;
  return e;
}

double pauli_from_average(double eps_avg, std::size_t d) {
  const double dd = static_cast<double>(d);
  return eps_avg * (1.0 - 1.0 / (dd * dd)) / (1.0 - 1.0 / dd);
}

ChannelFidelity compare_channel(const ComplexMatrix& superop, const ComplexMatrix& ideal) {
  const std::size_t d = ideal.rows();
  if (!ideal.is_square() || superop.rows() != d * d || superop.cols() != d * d)
    throw DimensionError("compare_channel: shape mismatch");
  const ComplexMatrix su = unitary_superop(ideal);
  cplx tr{0.0, 0.0};
  const auto a = su.entries();
  const auto b = superop.entries();
  for (std::size_t k = 0; k < a.size(); ++k) tr += std::conj(a[k]) * b[k];
  const double dd = static_cast<double>(d);
  ChannelFidelity f;
  f.process_fidelity = tr.real() / (dd * dd);
  f.eps_avg = (1.0 - f.process_fidelity) * dd / (dd + 1.0);
  f.eps_pauli = pauli_from_average(f.eps_avg, d);
  return f;
}

ComplexMatrix lindblad_channel(const models::LindbladSpec& spec, double tau) {
  if (!(tau >= 0.0) || !finite(tau)) throw std::invalid_argument("lindblad_channel: tau must be >= 0");
  const ComplexMatrix s = general_expm(dynamics::lindblad_superop(spec) * cplx{tau, 0.0});
  const std::size_t d = spec.dim();
  for (std::size_t col = 0; col < d * d; ++col) {
    cplx t{0.0, 0.0};
    for (std::size_t i = 0; i < d; ++i) t += s(i * d + i, col);
    const bool diag = (col / d) == (col % d);
    if (std::abs(t - cplx{diag ? 1.0 : 0.0, 0.0}) > dynamics::kTraceTolerance)
      throw dynamics::IntegrationError("lindblad_channel: trace not preserved");
  }
  return s;
}

ChannelFidelity average_gate_error(const models::LindbladSpec& spec, const ComplexMatrix& ideal,
                                   double tau) {
  return compare_channel(lindblad_channel(spec, tau), ideal);
}

GateErrorReport channel_errors(const FsimGate& gate, double gamma_g) {
  gate.validate();
  GateErrorReport r;
  r.gate = gate;
  r.gamma_g_used = gamma_g;
  const FirstOrderErrors first = first_order_errors(gamma_g, gate.tau);
  r.eps_avg_analytic = first.eps_avg;
  r.eps_pauli_analytic = first.eps_pauli;
  r.beyond_weak_noise = first.beyond_weak_noise;
  const ChannelFidelity f =
      average_gate_error(gate_lindblad_spec(gate, gamma_g), gate.unitary(), gate.tau);
  r.process_fidelity = f.process_fidelity;
  r.eps_avg_channel = f.eps_avg;
  r.eps_pauli_channel = f.eps_pauli;
  r.notes = "channel: exp(L tau) with dressed flips at gamma_g/2";
  if (r.beyond_weak_noise) r.notes += "; gamma_g*tau >= 0.2, first-order values unreliable";
  return r;
}

ComplexMatrix depolarizing_channel(const ComplexMatrix& ideal, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("depolarizing_channel: p outside [0, 1]");
  const std::size_t d = ideal.rows();
  ComplexMatrix s = unitary_superop(ideal) * cplx{p, 0.0};
  // rho -> Tr(rho) I/d: vec(I) vec(I)^T / d.
  const double w = (1.0 - p) / static_cast<double>(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) s(i * d + i, j * d + j) += w;
  return s;
}

ComplexMatrix haar_unitary_2(RandomStream& rng) {
  const double phi = std::asin(std::sqrt(rng.uniform()));
  const double alpha = kTwoPi * rng.uniform();
  const double beta = kTwoPi * rng.uniform();
  const double c = std::cos(phi), s = std::sin(phi);
  return ComplexMatrix{{std::polar(c, alpha), std::polar(s, beta)},
                       {-std::polar(s, -beta), std::polar(c, -alpha)}};
}

GateNoise GateNoise::lindblad(double gamma_g) {
  GateNoise n;
  n.kind = Kind::kLindblad;
  n.gamma_g = gamma_g;
  return n;
}

GateNoise GateNoise::stochastic(const noise::NoiseSpectrum& spectrum, std::size_t n_traj,
                                double dt) {
  GateNoise n;
  n.kind = Kind::kStochastic;
  n.spectrum = spectrum;
  n.n_traj = n_traj;
  n.dt = dt;
  return n;
}

ComplexMatrix gate_channel(const FsimGate& gate, const GateNoise& noise, std::uint64_t seed,
                           unsigned threads) {
  gate.validate();
  switch (noise.kind) {
    case GateNoise::Kind::kNone:
      return unitary_superop(gate.unitary());
    case GateNoise::Kind::kLindblad:
      return lindblad_channel(gate_lindblad_spec(gate, noise.gamma_g), gate.tau);
    case GateNoise::Kind::kStochastic:
      break;
  }
  if (!noise.spectrum) throw std::invalid_argument("gate_channel: stochastic noise needs a spectrum");
  if (noise.n_traj == 0) throw std::invalid_argument("gate_channel: n_traj must be > 0");
  models::LindbladSpec spec;
  spec.hamiltonian = gate_hamiltonian(gate);
  spec.noise_operator = gate_noise_operator();
  if (noise.dt > dynamics::max_noise_step(spec))
    throw std::invalid_argument("gate_channel: dt exceeds the noise step limit");
  const double ratio = gate.tau / noise.dt;
  const auto n_steps = static_cast<std::size_t>(std::llround(ratio));
  if (n_steps == 0 || std::abs(ratio - static_cast<double>(n_steps)) > 1e-9 * ratio)
    throw std::invalid_argument("gate_channel: tau must be a multiple of dt");
  const double synth = noise::fft_friendly_duration(
      std::max({dynamics::kSynthesisSpan * gate.tau, noise::minimum_synthesis_duration(*noise.spectrum),
                noise.dt}),
      noise.dt);
  std::vector<ComplexMatrix> parts(noise.n_traj);
  dynamics::parallel_for(noise.n_traj, threads, [&](std::size_t i) {
    const auto traj = noise::synthesize(*noise.spectrum, synth, noise.dt,
                                        {seed, dynamics::trajectory_stream(kGateNoiseTag, i)}, n_steps);
    parts[i] = unitary_superop(dynamics::noisy_propagator(spec, traj, gate.tau));
  });
  ComplexMatrix sum(kGateDim * kGateDim, kGateDim * kGateDim);
  for (const auto& p : parts) sum += p;
  return sum * cplx{1.0 / static_cast<double>(noise.n_traj), 0.0};
}

XebResult run_xeb(const ComplexMatrix& ideal_gate, const ComplexMatrix& gate_superop,
                  const XebOptions& options) {
  if (ideal_gate.rows() != kGateDim || !ideal_gate.is_square())
    throw DimensionError("run_xeb: gate must be 4x4");
  if (gate_superop.rows() != kGateDim * kGateDim || !gate_superop.is_square())
    throw DimensionError("run_xeb: gate superoperator must be 16x16");
  if (options.depths.size() < 3) throw std::invalid_argument("run_xeb: need at least 3 depths");
  if (options.circuit_count < 20) throw std::invalid_argument("run_xeb: need at least 20 circuits");
  for (std::size_t k = 1; k < options.depths.size(); ++k)
    if (options.depths[k] <= options.depths[k - 1])
      throw std::invalid_argument("run_xeb: depths must increase");

  const std::size_t n_c = options.circuit_count;
  const std::size_t n_d = options.depths.size();
  XebTable table(n_c, std::vector<XebTerms>(n_d));
  dynamics::parallel_for(n_c, options.threads, [&](std::size_t c) {
    for (std::size_t k = 0; k < n_d; ++k)
      table[c][k] = run_circuit(ideal_gate, gate_superop, options.depths[k], options.seed, c,
                                options.shots);
  });

  XebResult r;
  r.depths = options.depths;
  r.circuit_count = n_c;
  r.seed = options.seed;
  r.fidelities = pooled(table, n_d, n_c);
  const DecayEstimate full = fit_decay(r.depths, r.fidelities);
  r.decay = full.fit.p;
  r.amplitude = full.fit.amplitude;
  r.per_cycle_pauli_error = full.eps;
  r.converged = full.fit.converged;

  std::vector<std::vector<double>> loo_f(n_d, std::vector<double>(n_c));
  r.loo_pauli_errors.resize(n_c);
  for (std::size_t c = 0; c < n_c; ++c) {
    const auto f = pooled(table, n_d, c);
    for (std::size_t k = 0; k < n_d; ++k) loo_f[k][c] = f[k];
    const DecayEstimate e = fit_decay(r.depths, f);
    r.loo_pauli_errors[c] = e.eps;
    r.converged = r.converged && e.fit.converged;
  }
  r.fidelity_stderrs.resize(n_d);
  for (std::size_t k = 0; k < n_d; ++k) r.fidelity_stderrs[k] = fitting::jackknife_stderr(loo_f[k]);
  r.per_cycle_pauli_stderr = fitting::jackknife_stderr(r.loo_pauli_errors);
  return r;
}

XebResult run_xeb(const FsimGate& gate, const GateNoise& noise, const XebOptions& options) {
  return run_xeb(gate.unitary(), gate_channel(gate, noise, options.seed, options.threads), options);
}

XebDelta xeb_delta(const FsimGate& gate, const GateNoise& noise, const XebOptions& options) {
  XebDelta out;
  out.noisy = run_xeb(gate, noise, options);
  out.baseline = run_xeb(gate, GateNoise::none(), options);
  out.delta_eps = out.noisy.per_cycle_pauli_error - out.baseline.per_cycle_pauli_error;
  std::vector<double> diff(out.noisy.loo_pauli_errors.size());
  for (std::size_t c = 0; c < diff.size(); ++c)
    diff[c] = out.noisy.loo_pauli_errors[c] - out.baseline.loo_pauli_errors[c];
  out.delta_stderr = fitting::jackknife_stderr(diff);
  return out;
}

namespace {

struct Rate {
  double value = 0.0;
  double stderr_ = 0.0;
};

Rate gamma_for(const ScanBase& base, const noise::NoiseSpectrum& spectrum, double g,
               std::size_t index) {
  if (base.gamma_source == GammaSource::kAnalytic) return {models::gamma_g_analytic(spectrum, g), 0.0};
  models::CoupledPair pair;
  pair.g = g;
  experiments::DressedOptions opt = base.relaxation;
  opt.stream_offset = base.relaxation.stream_offset + index;
  const auto r = experiments::run_dressed_relaxation(pair, spectrum, opt);
  return {r.rate, r.rate_stderr};
}

DeltaEpsPoint scan_point(const ScanBase& base, const noise::NoiseSpectrum& spectrum, double g,
                         double tau, std::size_t index) {
  DeltaEpsPoint p;
  const FsimGate gate = fsim_from_evolution(g, tau);
  const double analytic_gamma = models::gamma_g_analytic(spectrum, g);
  p.analytic = analytic_gamma * tau / 4.0;
  GateNoise gn;
  if (base.noise_kind == GateNoise::Kind::kStochastic) {
    gn = GateNoise::stochastic(spectrum, base.stochastic_traj, base.stochastic_dt);
    p.gamma_g = analytic_gamma;
  } else if (base.noise_kind == GateNoise::Kind::kLindblad) {
    const Rate rate = gamma_for(base, spectrum, g, index);
    p.gamma_g = rate.value;
    p.gamma_g_stderr = rate.stderr_;
    gn = GateNoise::lindblad(std::max(0.0, rate.value));
  }
  const XebDelta d = xeb_delta(gate, gn, base.xeb);
  p.delta_eps = d.delta_eps;
  p.delta_stderr = d.delta_stderr;
  return p;
}

void check_grid(const std::vector<double>& v, const char* what) {
  if (v.size() < 4) throw std::invalid_argument(std::string(what) + ": need at least 4 grid points");
  for (double x : v)
    if (!(x > 0.0) || !finite(x)) throw std::invalid_argument(std::string(what) + ": grid values must be > 0");
}

void fit_table(DeltaEpsTable& t) {
  std::vector<double> x, y;
  for (const auto& p : t.points) {
    x.push_back(p.value);
    y.push_back(p.delta_eps);
  }
  t.fit = fitting::linear_fit(x, y);
}

}  // namespace

DeltaEpsTable power_sweep(const ScanBase& base, const std::vector<double>& multipliers) {
  check_grid(multipliers, "power_sweep");
  DeltaEpsTable t;
  t.variable = "psd_multiplier";
  for (std::size_t i = 0; i < multipliers.size(); ++i) {
    DeltaEpsPoint p = scan_point(base, base.spectrum.scaled(multipliers[i]), base.g, base.tau, i);
    p.value = multipliers[i];
    t.points.push_back(p);
  }
  fit_table(t);
  return t;
}

DeltaEpsTable tau_sweep(const ScanBase& base, const std::vector<double>& taus_us) {
  check_grid(taus_us, "tau_sweep");
  DeltaEpsTable t;
  t.variable = "tau_us";
  for (std::size_t i = 0; i < taus_us.size(); ++i) {
    // The relaxation rate does not depend on tau; measure it once.
    DeltaEpsPoint p = scan_point(base, base.spectrum, base.g, taus_us[i], 0);
    p.value = taus_us[i];
    t.points.push_back(p);
  }
  fit_table(t);
  return t;
}

DeltaEpsTable g_sweep(const ScanBase& base, const std::vector<double>& g_values) {
  check_grid(g_values, "g_sweep");
  DeltaEpsTable t;
  t.variable = "two_g_mhz";
  for (std::size_t i = 0; i < g_values.size(); ++i) {
    DeltaEpsPoint p = scan_point(base, base.spectrum, g_values[i], base.tau, i);
    p.value = 2.0 * g_values[i] / kTwoPi;
    t.points.push_back(p);
  }
  return t;
}

void write_delta_eps_csv(std::ostream& out, const DeltaEpsTable& table) {
  out << table.variable << ",gamma_g_per_us,gamma_g_stderr_per_us,delta_eps,stderr,analytic\n";
  for (const auto& p : table.points)
    out << io::format_double(p.value) << ',' << io::format_double(p.gamma_g) << ','
        << io::format_double(p.gamma_g_stderr) << ',' << io::format_double(p.delta_eps) << ','
        << io::format_double(p.delta_stderr) << ',' << io::format_double(p.analytic) << '\n';
}

}  // namespace dressed::gate_error
