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

// Classical Gaussian detuning noise: target spectra, time-domain synthesis,
// averaged-periodogram estimation, gating, and the measurement-chain
// calibration arithmetic that maps analyzer readings to a frequency-noise PSD.
//
// PSD convention: two-sided, angular-frequency argument,
//   S(w) = int dt e^{i w t} <d(t) d(0)>,
// so that the process variance is (1/2pi) * int_{-inf}^{inf} S(w) dw.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dressed::noise {

class NoiseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class SpectrumKind { kFlatBand, kTabulated };

struct SpectrumPoint {
  double omega;  // rad/us, >= 0
  double psd;    // rad^2/us, >= 0
};

/// Two-sided detuning-noise PSD. Only w >= 0 is stored; S(-w) = S(w).
class NoiseSpectrum {
 public:
  /// Level S0 on band_low <= |w| <= band_high, zero elsewhere.
  static NoiseSpectrum flat_band(double band_low, double band_high, double level);
  /// Piecewise-linear interpolation of the table, zero outside it.
  static NoiseSpectrum tabulated(std::vector<SpectrumPoint> table);

  SpectrumKind kind() const { return kind_; }
  double band_low() const { return band_low_; }
  double band_high() const { return band_high_; }
  double level() const { return level_; }
  const std::vector<SpectrumPoint>& table() const { return table_; }

  double operator()(double omega) const;
  NoiseSpectrum scaled(double factor) const;
  bool is_zero() const;
  /// (1/2pi) * integral of S over all frequencies.
  double variance() const;
  /// Smallest and largest |w| carrying nonzero power (the band for flat spectra).
  std::pair<double, double> support() const;

 private:
  NoiseSpectrum() = default;
  SpectrumKind kind_ = SpectrumKind::kFlatBand;
  double band_low_ = 0.0;
  double band_high_ = 0.0;
  double level_ = 0.0;
  std::vector<SpectrumPoint> table_;
};

struct NoiseSeed {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;
};

/// Sample k holds the detuning d(t_k), t_k = k*dt, and is treated as constant
/// over [t_k, t_k + dt).
struct NoiseTrajectory {
  double dt = 0.0;
  std::vector<double> samples;
  NoiseSeed seed;

  double duration() const { return dt * static_cast<double>(samples.size()); }
  double time(std::size_t k) const { return dt * static_cast<double>(k); }
};

/// Minimum number of comb lines inside the band for a nonzero spectrum.
inline constexpr std::size_t kMinCombBins = 50;

/// Random-phase cosine comb with line spacing dw = 2pi/duration and
/// amplitudes A_k = sqrt(2 S(w_k) dw / pi), so that the sample variance is
/// (1/2pi) * int S(w) dw. Requires dt <= 2pi/(10 w_high) and
/// duration >= 10 * 2pi / w_low over the spectrum's support.
///
/// When duration is a whole number of steps the comb is evaluated with an
/// inverse real FFT, otherwise sample by sample; both give the same sum.
/// max_samples > 0 truncates the output.
NoiseTrajectory synthesize(const NoiseSpectrum& spec, double duration, double dt, NoiseSeed seed,
                           std::size_t max_samples = 0);

/// Direct (non-FFT) evaluation of the same comb, for cross-checking.
NoiseTrajectory synthesize_direct(const NoiseSpectrum& spec, double duration, double dt,
                                  NoiseSeed seed, std::size_t max_samples = 0);

/// Smallest n * dt >= min_duration with n a product of 2, 3, 5, 7.
double fft_friendly_duration(double min_duration, double dt);

/// Smallest duration that satisfies synthesize()'s preconditions for spec.
double minimum_synthesis_duration(const NoiseSpectrum& spec);

/// Averaged periodogram over non-overlapping rectangular segments of
/// segment_len samples (a power of two). Returns bins w_k = 2pi k/(M dt),
/// k = 0..M/2, with S_k = dt/M * <|X_k|^2>.
NoiseSpectrum estimate_psd(const NoiseTrajectory& traj, std::size_t segment_len);

/// Zeroes samples with t_k outside [t_on, t_off).
NoiseTrajectory gate_window(const NoiseTrajectory& traj, double t_on, double t_off);

void write_spectrum_csv(std::ostream& out, const NoiseSpectrum& spec);
NoiseSpectrum read_spectrum_csv(std::istream& in);
void write_trajectory_csv(std::ostream& out, const NoiseTrajectory& traj);

inline constexpr const char* kSpectrumCsvHeader = "omega_rad_per_us,psd_rad2_per_us";
inline constexpr const char* kTrajectoryCsvHeader = "t_us,delta_rad_per_us";

// --- measurement-chain calibration -----------------------------------------

struct PowerCalibration {
  double sigma_v = 0.0;                    // output voltage standard deviation (V)
  double impedance_ohm = 50.0;             // line impedance R
  double chain_factor = 1.0;               // aggregate power factor C
  double freq_sensitivity_hz_per_v = 0.0;  // df/dV
  double rbw_hz = 1e3;                     // analyzer resolution bandwidth

  /// Throws NoiseError unless sigma_v >= 0 and every other field is > 0.
  void validate() const;
};

/// P_out = sigma^2 / R (watts).
double output_power(double sigma_v, double impedance_ohm);

/// S_w = C * 10^((P - 30)/10) / RBW * R * (2pi df/dV)^2, in rad^2/s.
double psd_from_analyzer(double p_avg_dbm, const PowerCalibration& cal);

}  // namespace dressed::noise
