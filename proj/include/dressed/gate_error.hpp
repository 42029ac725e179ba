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

// Two-qubit exchange gates and their error under dressed-state relaxation:
// first-order formulas, exact channel fidelities, and simulated
// cross-entropy benchmarking (XEB).
//
// Matrices here use the computational basis (|00>, |01>, |10>, |11>), with
// qubit 0 as the first label.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dressed/algebra.hpp"
#include "dressed/experiments.hpp"
#include "dressed/fitting.hpp"
#include "dressed/models.hpp"
#include "dressed/noise.hpp"
#include "dressed/rng.hpp"

namespace dressed::gate_error {

inline constexpr std::size_t kGateDim = 4;

/// [[1,0,0,0],[0,cos t,-i sin t,0],[0,-i sin t,cos t,0],[0,0,0,exp(-i phi)]].
ComplexMatrix fsim_matrix(double theta, double phi);

struct FsimGate {
  double theta = 0.0;     // exchange angle, rad
  double phi = 0.0;       // controlled phase, rad
  double tau = 0.0;       // interaction time, us
  double detuning = 0.0;  // qubit 0 minus qubit 1 during the interaction, rad/us

  /// Throws std::invalid_argument unless tau > 0 and all fields are finite.
  void validate() const;
  /// fsim_matrix(theta, phi) when detuning == 0; otherwise the numerically
  /// propagated exchange unitary, which is not of fSim form.
  ComplexMatrix unitary() const;
};

/// theta = g * tau, phi = 0. tau = 0 gives the identity gate.
FsimGate fsim_from_evolution(double g, double tau, double detuning = 0.0);

/// H with exp(-i H tau) = gate.unitary():
/// (theta/tau)(|01><10| + h.c.) + (phi/tau)|11><11| + (detuning/2)(|10><10| - |01><01|).
ComplexMatrix gate_hamiltonian(const FsimGate& gate);

/// Detuning noise split symmetrically between the qubits:
/// (|10><10| - |01><01|) / 2.
ComplexMatrix gate_noise_operator();

/// |1~><0~| and |0~><1~| embedded in the two-qubit space.
ComplexMatrix dressed_raising();
ComplexMatrix dressed_lowering();

/// Gate Hamiltonian plus the two dressed flips at gamma_g / 2 each.
models::LindbladSpec gate_lindblad_spec(const FsimGate& gate, double gamma_g);

struct FirstOrderErrors {
  double eps_avg = 0.0;    // gamma_g tau / 5
  double eps_pauli = 0.0;  // gamma_g tau / 4
  /// gamma_g tau >= kWeakNoiseLimit: the linear formulas are outside their
  /// range of validity.
  bool beyond_weak_noise = false;
};

inline constexpr double kWeakNoiseLimit = 0.2;

FirstOrderErrors first_order_errors(double gamma_g, double tau);

/// eps_pauli = eps_avg (1 - 1/d^2) / (1 - 1/d).
double pauli_from_average(double eps_avg, std::size_t d);

struct ChannelFidelity {
  double process_fidelity = 1.0;
  double eps_avg = 0.0;
  double eps_pauli = 0.0;
};

/// Process fidelity Tr(S_U^dagger S) / d^2 of a row-major superoperator S
/// against the ideal unitary U, and the derived average and Pauli errors.
ChannelFidelity compare_channel(const ComplexMatrix& superop, const ComplexMatrix& ideal);

/// exp(L tau) for the Lindblad generator L of `spec`.
ComplexMatrix lindblad_channel(const models::LindbladSpec& spec, double tau);

/// compare_channel(lindblad_channel(spec, tau), ideal).
ChannelFidelity average_gate_error(const models::LindbladSpec& spec, const ComplexMatrix& ideal,
                                   double tau);

struct GateErrorReport {
  FsimGate gate;
  double gamma_g_used = 0.0;  // 1/us
  double eps_avg_analytic = 0.0;
  double eps_pauli_analytic = 0.0;
  double eps_avg_channel = 0.0;
  double eps_pauli_channel = 0.0;
  double process_fidelity = 1.0;
  bool beyond_weak_noise = false;
  std::string notes;
};

GateErrorReport channel_errors(const FsimGate& gate, double gamma_g);

/// Depolarizing map rho -> p U rho U^dagger + (1 - p) I/d as a superoperator.
ComplexMatrix depolarizing_channel(const ComplexMatrix& ideal, double p);

/// Haar-random 2x2 unitary.
ComplexMatrix haar_unitary_2(RandomStream& rng);

struct GateNoise {
  enum class Kind { kNone, kLindblad, kStochastic };
  Kind kind = Kind::kNone;
  double gamma_g = 0.0;  // kLindblad
  std::optional<noise::NoiseSpectrum> spectrum;  // kStochastic
  std::size_t n_traj = 400;  // kStochastic: trajectories averaged into the channel
  double dt = 0.001;         // kStochastic: noise sample spacing, us

  static GateNoise none() { return {}; }
  static GateNoise lindblad(double gamma_g);
  static GateNoise stochastic(const noise::NoiseSpectrum& spectrum, std::size_t n_traj,
                              double dt);
};

/// Superoperator of one noisy gate. The stochastic channel is the average of
/// U_k (x) U_k^* over n_traj independent detuning trajectories confined to the
/// gate window, so successive gates see independent noise.
ComplexMatrix gate_channel(const FsimGate& gate, const GateNoise& noise, std::uint64_t seed,
                           unsigned threads = 0);

struct XebOptions {
  std::vector<std::size_t> depths{1, 2, 4, 8, 16};
  std::size_t circuit_count = 30;
  std::uint64_t seed = 1;
  /// 0 uses exact output distributions; otherwise the noisy distribution is
  /// estimated from this many samples per circuit.
  std::size_t shots = 0;
  unsigned threads = 0;
};

struct XebResult {
  std::vector<std::size_t> depths;
  std::vector<double> fidelities;          // pooled linear XEB per depth
  std::vector<double> fidelity_stderrs;    // jackknife over circuits
  double decay = 1.0;                      // p in F = A p^m
  double amplitude = 1.0;
  double per_cycle_pauli_error = 0.0;      // (1 - p)(1 - 1/d^2)
  double per_cycle_pauli_stderr = 0.0;     // jackknife over circuits
  std::size_t circuit_count = 0;
  std::uint64_t seed = 0;
  bool converged = false;

  /// Leave-one-circuit-out estimates of per_cycle_pauli_error, for paired
  /// differences between runs on the same circuits.
  std::vector<double> loo_pauli_errors;
};

/// Each cycle applies independent Haar-random rotations to both qubits and
/// then the gate; a final rotation layer precedes readout. Circuits depend
/// only on (seed, circuit index, depth), so runs with different gate
/// channels share their circuits. Throws std::invalid_argument for fewer
/// than 3 depths or 20 circuits. A failed decay fit leaves converged false.
XebResult run_xeb(const ComplexMatrix& ideal_gate, const ComplexMatrix& gate_superop,
                  const XebOptions& options);

/// run_xeb with gate_channel(gate, noise, options.seed).
XebResult run_xeb(const FsimGate& gate, const GateNoise& noise, const XebOptions& options);

struct XebDelta {
  XebResult noisy;
  XebResult baseline;
  double delta_eps = 0.0;
  double delta_stderr = 0.0;  // paired jackknife over circuits
};

/// Noisy and noise-free XEB on the same circuits.
XebDelta xeb_delta(const FsimGate& gate, const GateNoise& noise, const XebOptions& options);

// Sweeps of the XEB error increase against noise power, interaction time, and
// coupling strength.

enum class GammaSource { kAnalytic, kEnsembleFit };

struct ScanBase {
  explicit ScanBase(noise::NoiseSpectrum s) : spectrum(std::move(s)) {}

  double g = 0.0;    // rad/us
  double tau = 0.0;  // us
  noise::NoiseSpectrum spectrum;
  /// kLindblad feeds a dressed-flip rate into the gate channel; kStochastic
  /// integrates the noise directly over the gate window.
  GateNoise::Kind noise_kind = GateNoise::Kind::kLindblad;
  GammaSource gamma_source = GammaSource::kAnalytic;
  /// Used with GammaSource::kEnsembleFit.
  experiments::DressedOptions relaxation;
  std::size_t stochastic_traj = 400;
  double stochastic_dt = 0.001;
  XebOptions xeb;
};

struct DeltaEpsPoint {
  double value = 0.0;  // swept quantity, in the table's unit
  double gamma_g = 0.0;
  double gamma_g_stderr = 0.0;
  double delta_eps = 0.0;
  double delta_stderr = 0.0;
  double analytic = 0.0;  // gamma_g_analytic * tau / 4
};

struct DeltaEpsTable {
  std::string variable;  // column header, with unit
  std::vector<DeltaEpsPoint> points;
  std::optional<fitting::LinearFit> fit;  // delta_eps against value
};

/// Needs >= 4 grid points in each sweep.
DeltaEpsTable power_sweep(const ScanBase& base, const std::vector<double>& multipliers);
DeltaEpsTable tau_sweep(const ScanBase& base, const std::vector<double>& taus_us);
/// values are coupling strengths g in rad/us; the table reports 2g/2pi in MHz.
DeltaEpsTable g_sweep(const ScanBase& base, const std::vector<double>& g_values);

/// value,gamma_g_per_us,gamma_g_stderr_per_us,delta_eps,stderr,analytic.
void write_delta_eps_csv(std::ostream& out, const DeltaEpsTable& table);

}  // namespace dressed::gate_error
