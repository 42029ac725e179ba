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

// Numerical evolution: fixed-step Lindblad integration, piecewise-constant
// stochastic Hamiltonians, and Monte Carlo ensembles over noise trajectories.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "dressed/algebra.hpp"
#include "dressed/models.hpp"
#include "dressed/noise.hpp"

namespace dressed::dynamics {

using models::LindbladSpec;

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Observable {
  std::string name;
  ComplexMatrix op;  // Hermitian
};

struct NamedSeries {
  std::string name;
  std::vector<double> values;
};

struct EvolutionResult {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<NamedSeries> observables;
  double max_trace_drift = 0.0;      // max_k |Tr rho_k - 1| (Lindblad) or |1 - norm^2|
  double min_eigenvalue = 0.0;       // smallest eigenvalue seen at record times
  bool convergence_checked = false;
  double convergence_delta = 0.0;    // max entry change of the final state at dt/2
  bool converged = true;

  const std::vector<double>& series(const std::string& name) const;
};

struct EvolveOptions {
  /// Times at which to record. Each must be a multiple of dt (to 1e-9
  /// relative) within [0, duration]. Empty means every step.
  std::vector<double> record_times;
  std::vector<Observable> observables;
  bool keep_states = true;
  /// Rerun at dt/2 and compare final states (Lindblad only).
  bool check_convergence = false;
};

inline constexpr double kTraceTolerance = 1e-8;
inline constexpr double kPositivityFloor = -1e-7;
inline constexpr double kConvergenceTolerance = 1e-6;

/// Largest dt accepted by evolve_lindblad for this spec.
double max_lindblad_step(const LindbladSpec& spec);

/// Row-major vectorized generator L with d vec(rho)/dt = L vec(rho),
/// built from the static Hamiltonian and the jumps.
ComplexMatrix lindblad_superop(const LindbladSpec& spec);

/// Dissipative part of lindblad_superop only.
ComplexMatrix dissipator_superop(const LindbladSpec& spec);

/// Classical RK4 on vec(rho). Throws IntegrationError on a step-size
/// violation or when the trace drifts by more than kTraceTolerance.
EvolutionResult evolve_lindblad(const LindbladSpec& spec, const DensityMatrix& rho0,
                                double duration, double dt, const EvolveOptions& options = {});

/// The RK4 map over `duration` as a d^2 x d^2 superoperator.
ComplexMatrix lindblad_propagator(const LindbladSpec& spec, double duration, double dt);

/// Largest noise-sample spacing accepted by the stochastic evolutions.
double max_noise_step(const LindbladSpec& spec);

/// Exact exponentials of H0 + d_k N over each sample of traj for the first
/// round(duration / traj.dt) samples. Jumps in spec must be empty.
EvolutionResult evolve_noisy_unitary(const LindbladSpec& spec, const StateVector& psi0,
                                     const noise::NoiseTrajectory& traj, double duration,
                                     const EvolveOptions& options = {});

/// Density-matrix evolution with jumps and the stochastic Hamiltonian:
/// per sample, a symmetric split D(dt/2) U_k D(dt/2) with D the exact
/// dissipator exponential.
EvolutionResult evolve_noisy_lindblad(const LindbladSpec& spec, const DensityMatrix& rho0,
                                      const noise::NoiseTrajectory& traj, double duration,
                                      const EvolveOptions& options = {});

/// Product of per-sample propagators over [0, duration).
ComplexMatrix noisy_propagator(const LindbladSpec& spec, const noise::NoiseTrajectory& traj,
                               double duration);

inline constexpr double kSynthesisSpan = 50.0;

struct EnsembleOptions {
  std::size_t n_traj = 100;
  std::uint64_t seed = 0;
  /// Separates independent experiments that share a master seed.
  std::uint64_t stream_tag = 0;
  /// Trajectory i uses stream trajectory_stream(stream_tag, first_index + i).
  std::size_t first_index = 0;
  double dt = 0.002;
  std::vector<double> record_times;
  std::vector<Observable> observables;
  /// Comb period for synthesis. 0 picks kSynthesisSpan times the evolved
  /// window (or the synthesis minimum, if larger), so that comb lines are
  /// much closer together than any rate resolvable within the window.
  double synthesis_duration = 0.0;
  /// Optional idle interval before t = 0 during which the static Hamiltonian
  /// is off. With gate_noise set, noise is zeroed during the idle interval.
  double idle_before = 0.0;
  bool gate_noise = true;
  bool keep_mean_states = false;
  bool keep_per_trajectory = false;
  /// 0 selects std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct EnsembleResult {
  std::size_t trajectory_count = 0;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<NamedSeries> mean_observables;
  std::vector<NamedSeries> standard_errors;
  std::vector<ComplexMatrix> mean_states;  // one per record time, if kept
  /// per_trajectory[o][i][t]: observable o, trajectory i, record time t.
  std::vector<std::vector<std::vector<double>>> per_trajectory;
  double max_trace_drift = 0.0;

  const std::vector<double>& mean(const std::string& name) const;
  const std::vector<double>& stderr_of(const std::string& name) const;
};

/// Stream index of trajectory i under a tag.
std::uint64_t trajectory_stream(std::uint64_t stream_tag, std::size_t index);

/// Mean and standard error of observables over n_traj independent noise
/// realizations. Trajectories may run concurrently; reduction is in index
/// order so results do not depend on the thread count.
EnsembleResult ensemble_relaxation(const LindbladSpec& spec, const noise::NoiseSpectrum& noise,
                                   const DensityMatrix& rho0, double duration,
                                   const EnsembleOptions& options);

/// Runs fn(i) for i in [0, n) on up to `threads` workers (0 = hardware).
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

/// CSV with header t_us,<name>,stderr.
void write_series_csv(std::ostream& out, const std::vector<double>& times,
                      const std::string& name, const std::vector<double>& values,
                      const std::vector<double>& stderrs);

}  // namespace dressed::dynamics
