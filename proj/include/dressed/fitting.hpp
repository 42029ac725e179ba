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

// Nonlinear least squares for relaxation and oscillation traces, plus the
// small linear-regression and resampling helpers the protocols share.

#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace dressed::fitting {

enum class FitStatus { kConverged, kNotConverged, kDegenerate, kAliased, kInsufficientCoverage };

std::string_view to_string(FitStatus s);

/// A * exp(-rate * t) + offset.
struct DecayFit {
  double rate = 0.0;  // 1/us
  double amplitude = 0.0;
  double offset = 0.0;
  double rate_stderr = 0.0;
  double residual_rms = 0.0;
  FitStatus status = FitStatus::kNotConverged;

  bool converged() const { return status == FitStatus::kConverged; }
};

/// amplitude * exp(-t / decay_time) * cos(2 pi frequency t + phase) + offset,
/// with t in us and frequency in MHz.
struct SinusoidFit {
  double frequency = 0.0;   // MHz
  double decay_time = 0.0;  // us; +inf when no decay is resolved
  double amplitude = 0.0;
  double phase = 0.0;
  double offset = 0.0;
  double frequency_stderr = 0.0;
  double residual_rms = 0.0;
  FitStatus status = FitStatus::kNotConverged;

  bool converged() const { return status == FitStatus::kConverged; }
};

/// Model value and gradient with respect to the parameters at one abscissa.
using ModelFn = std::function<double(std::span<const double> params, double x,
                                     std::span<double> grad)>;

struct LeastSquaresResult {
  std::vector<double> params;
  std::vector<double> stderrs;  // sqrt(diag(s^2 (J^T J)^-1)), s^2 = SSR/(n - p)
  double ssr = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) with analytic Jacobian.
LeastSquaresResult levenberg_marquardt(const ModelFn& model, std::span<const double> x,
                                       std::span<const double> y, std::vector<double> start,
                                       int max_iterations = 500);

/// Requires >= 8 points. Multi-start from half-range, log-linear, and
/// initial-slope guesses; the smallest residual wins.
DecayFit fit_exponential(std::span<const double> times, std::span<const double> values);

/// A * exp(-rate * t) with the offset held at zero, for observables whose
/// asymptote is known. Same point requirement and result type; offset is 0.
DecayFit fit_exponential_to_zero(std::span<const double> times, std::span<const double> values);

/// Requires >= 8 points. The frequency guess is the peak of the discrete
/// spectrum; envelope decay starts from zero, half-range, and log-linear
/// guesses. Flags aliasing (frequency >= Nyquist) and insufficient coverage
/// (< 4 samples per period or < 3 periods).
SinusoidFit fit_damped_sinusoid(std::span<const double> times, std::span<const double> values);

/// Peak of |sum_k (y_k - mean) exp(-2 pi i f t_k)| over (0, Nyquist], MHz.
double spectrum_peak_frequency(std::span<const double> times, std::span<const double> values);

/// A * p^x fitted by least squares; returns {A, p, stderr_A, stderr_p, converged}.
struct PowerDecayFit {
  double amplitude = 0.0;
  double p = 0.0;
  double amplitude_stderr = 0.0;
  double p_stderr = 0.0;
  bool converged = false;
};
PowerDecayFit fit_power_decay(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares; needs >= 3 points.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Delete-one jackknife standard error of leave-one-out estimates.
double jackknife_stderr(std::span<const double> leave_one_out);

}  // namespace dressed::fitting
