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

// Protocol runners for the spin-locking, dressed-state relaxation, swap
// calibration, and rate-versus-power measurements.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dressed/algebra.hpp"
#include "dressed/fitting.hpp"
#include "dressed/models.hpp"
#include "dressed/noise.hpp"

namespace dressed::experiments {

using fitting::DecayFit;
using fitting::LinearFit;
using fitting::SinusoidFit;

/// Hardware rate-to-power ratios, (mW us)^-1. Informational only; the
/// simulator has no calibrated power scale to compare them against.
inline constexpr double kReferenceSlopeSpinLock = 1.23;
inline constexpr double kReferenceSlopeDressed = 1.13;

/// Uniform grid {start, start + step, ..., stop}.
std::vector<double> uniform_grid(double start, double stop, double step);

/// kFreeOffset fits A exp(-rate t) + B. kZeroAsymptote holds B at zero: the
/// polarizations read here relax to zero, and the constrained fit stays well
/// posed when the series barely decays within the window.
enum class DecayModel { kFreeOffset, kZeroAsymptote };

struct ProtocolOptions {
  std::vector<double> durations;  // hold/lock durations, us, increasing
  std::size_t n_traj = 400;
  std::uint64_t seed = 1;
  /// Distinguishes independent runs (e.g. power points) under one seed.
  std::uint64_t stream_offset = 0;
  double dt = 0.002;  // us
  std::size_t jackknife_groups = 10;
  DecayModel decay_model = DecayModel::kFreeOffset;
  unsigned threads = 0;
};

enum class Readout { kDirect, kPhaseSweep, kShots };
enum class Preparation { kIdeal, kGateComposed };

struct DressedOptions : ProtocolOptions {
  Readout readout = Readout::kDirect;
  std::size_t phase_points = 16;
  std::size_t shots = 2000;
  Preparation preparation = Preparation::kIdeal;
  /// Idle time between preparation and hold (coupling off), us.
  double prep_idle = 0.0;
  /// Noise acts only during the hold window.
  bool gate_noise = true;
};

struct ProtocolResult {
  std::string observable;          // column name for CSV output
  std::vector<double> durations;   // us
  std::vector<double> values;
  std::vector<double> stderrs;
  DecayFit fit;                    // total rate
  DecayFit baseline_fit;           // zero-noise run
  double total_rate = 0.0;         // fit.rate (1/us)
  double baseline_rate = 0.0;
  double rate = 0.0;               // noise-induced: total - baseline
  double rate_stderr = 0.0;        // delete-one-group jackknife
  double analytic_rate = 0.0;      // closed-form noise-induced rate
  double noise_level = 0.0;        // spectrum peak level, rad^2/us
  double noise_variance = 0.0;     // (rad/us)^2
  std::size_t n_traj = 0;
  std::uint64_t seed = 0;
};

/// Prepare (|0> + |1>)/sqrt2, lock along x at Omega, record <sigma_x>.
ProtocolResult run_spin_locking(const models::DrivenQubit& model,
                                const noise::NoiseSpectrum& noise, const ProtocolOptions& opt);

/// Prepare |1~>, hold at resonance with the coupling on, record the dressed
/// polarization <|1~><1~| - |0~><0~|>.
ProtocolResult run_dressed_relaxation(const models::CoupledPair& model,
                                      const noise::NoiseSpectrum& noise,
                                      const DressedOptions& opt);

/// Dressed polarization of the triad (no noise) from Lindblad integration,
/// with the population-difference decay fitted.
ProtocolResult run_triad_relaxation(const models::CoupledPair& model, double gamma_g,
                                    const std::vector<double>& durations, double dt);

struct PhaseSweepResult {
  double polarization = 0.0;
  double cos_amplitude = 0.0;  // a in a cos(theta) + b sin(theta) + c
  double sin_amplitude = 0.0;
  double offset = 0.0;
  bool degenerate = false;
};

/// thetas.size() equally spaced phases over [0, 2pi) starting at 0.
std::vector<double> phase_grid(std::size_t points);

/// Applies Z(theta) to qubit 0 of a single-excitation state (basis |10>,
/// |01>[, |00>]) and reads <|10><01| + |01><10|> for each theta, then fits
/// a cos(theta) + b sin(theta) + c by linear least squares. The polarization
/// is sign(a) sqrt(a^2 + b^2): insensitive to a fixed phase offset of the
/// dressed axis. Needs >= 8 phases.
PhaseSweepResult phase_sweep_readout(const ComplexMatrix& rho, std::span<const double> thetas);

struct SwapCalibration {
  SinusoidFit fit;
  double f_swap_mhz = 0.0;
  double g_inferred = 0.0;  // rad/us, = pi * f_swap
  std::vector<double> durations;
  std::vector<double> p01;
};

/// Initialize |10>, hold at the model's detuning, fit P(|01>)(t).
SwapCalibration run_swap_calibration(const models::CoupledPair& model,
                                     const std::vector<double>& durations, double dt);

struct ScanPoint {
  double multiplier = 0.0;
  double rate = 0.0;
  double rate_stderr = 0.0;
  double analytic_rate = 0.0;
};

struct PowerScan {
  std::vector<ScanPoint> points;
  LinearFit fit;
};

/// Runs runner(multiplier) -> (rate, stderr, analytic) for each multiplier
/// and fits rate = slope * multiplier + intercept. Needs >= 4 multipliers
/// and >= 3 finite rates.
PowerScan rate_vs_power_scan(
    const std::function<ScanPoint(double multiplier, std::size_t index)>& runner,
    const std::vector<double>& multipliers);

/// Dressed polarization operator in the bare single-excitation basis, padded
/// with zeros to dim (2 or 3).
ComplexMatrix dressed_polarization_operator(std::size_t dim);

/// Writes t_us,<observable>,stderr.
void write_protocol_csv(std::ostream& out, const ProtocolResult& r);

}  // namespace dressed::experiments
