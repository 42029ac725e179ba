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

#include "dressed/fitting.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "dressed/algebra.hpp"

namespace dressed::fitting {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_xy(std::span<const double> x, std::span<const double> y, std::size_t min_points,
              const char* what) {
  if (x.size() != y.size()) throw std::invalid_argument(std::string(what) + ": length mismatch");
  if (x.size() < min_points)
    throw std::invalid_argument(std::string(what) + ": need at least " +
                                std::to_string(min_points) + " points");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw std::invalid_argument(std::string(what) + ": non-finite input");
}

double sum_squares(const ModelFn& model, std::span<const double> p, std::span<const double> x,
                   std::span<const double> y, std::vector<double>& grad) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - model(p, x[i], grad);
    s += r * r;
  }
  return s;
}

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

double range_of(std::span<const double> y) {
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  return *hi - *lo;
}

bool is_constant(std::span<const double> y) {
  double scale = 0.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  return range_of(y) <= 1e-12 * std::max(scale, 1e-300) || range_of(y) == 0.0;
}

double median_spacing(std::span<const double> t) {
  std::vector<double> d;
  for (std::size_t i = 1; i < t.size(); ++i) d.push_back(t[i] - t[i - 1]);
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
  return d[d.size() / 2];
}

// Unweighted straight-line fit returning {slope, intercept}; assumes >= 2 points.
std::pair<double, double> line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return {slope, my - slope * mx};
}

double exp_model(std::span<const double> p, double t, std::span<double> g) {
  const double e = std::exp(-p[1] * t);
  g[0] = e;
  g[1] = -p[0] * t * e;
  g[2] = 1.0;
  return p[0] * e + p[2];
}

double exp_zero_model(std::span<const double> p, double t, std::span<double> g) {
  const double e = std::exp(-p[1] * t);
  g[0] = e;
  g[1] = -p[0] * t * e;
  return p[0] * e;
}

double sin_model(std::span<const double> p, double t, std::span<double> g) {
  // p = {A, lambda, f (MHz), phi, B}
  const double env = std::exp(-p[1] * t);
  const double arg = kTwoPi * p[2] * t + p[3];
  const double c = std::cos(arg), s = std::sin(arg);
  g[0] = env * c;
  g[1] = -t * p[0] * env * c;
  g[2] = -p[0] * env * s * kTwoPi * t;
  g[3] = -p[0] * env * s;
  g[4] = 1.0;
  return p[0] * env * c + p[4];
}

double wrap_phase(double phi) {
  phi = std::remainder(phi, kTwoPi);
  if (phi <= -kPi) phi += kTwoPi;
  return phi;
}

}  // namespace

std::string_view to_string(FitStatus s) {
  switch (s) {
    case FitStatus::kConverged: return "converged";
    case FitStatus::kNotConverged: return "not_converged";
    case FitStatus::kDegenerate: return "degenerate";
    case FitStatus::kAliased: return "aliased";
    case FitStatus::kInsufficientCoverage: return "insufficient_coverage";
  }
  return "unknown";
}

LeastSquaresResult levenberg_marquardt(const ModelFn& model, std::span<const double> x,
                                       std::span<const double> y, std::vector<double> start,
                                       int max_iterations) {
  const std::size_t n = x.size();
  const std::size_t m = start.size();
  LeastSquaresResult res;
  res.params = std::move(start);
  std::vector<double> grad(m);

  Eigen::MatrixXd jac(n, m);
  Eigen::VectorXd r(n);
  auto evaluate = [&](const std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = model(p, x[i], grad);
      r(static_cast<Eigen::Index>(i)) = y[i] - f;
      for (std::size_t k = 0; k < m; ++k) jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = grad[k];
      s += (y[i] - f) * (y[i] - f);
    }
    return s;
  };

  double ssr = evaluate(res.params);
  if (!std::isfinite(ssr)) return res;
  double lambda = 1e-3;
  std::vector<double> trial(m);
  for (int it = 0; it < max_iterations; ++it) {
    res.iterations = it + 1;
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jtr = jac.transpose() * r;
    bool accepted = false;
    bool stalled = false;
    double max_rel_step = 0.0;
    while (!accepted) {
      Eigen::MatrixXd a = jtj;
      for (std::size_t k = 0; k < m; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        a(kk, kk) += lambda * std::max(jtj(kk, kk), 1e-300);
      }
      const Eigen::VectorXd delta = a.ldlt().solve(jtr);
      max_rel_step = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        trial[k] = res.params[k] + delta(static_cast<Eigen::Index>(k));
        max_rel_step = std::max(max_rel_step, std::abs(delta(static_cast<Eigen::Index>(k))) /
                                                  (std::abs(res.params[k]) + 1e-12));
      }
      const double s_new = delta.allFinite() && all_finite(trial)
                               ? sum_squares(model, trial, x, y, grad)
                               : kInf;
      if (std::isfinite(s_new) && s_new <= ssr) {
        accepted = true;
        res.params = trial;
        const double old = ssr;
        ssr = evaluate(res.params);
        lambda = std::max(lambda * 0.1, 1e-15);
        // A flat residual alone is not enough: the parameters may still be
        // drifting well above round-off.
        const bool flat = old - ssr <= 1e-15 * old;
        if (max_rel_step < 1e-12 || (flat && max_rel_step < 1e-11) || ssr < 1e-300) {
          res.converged = true;
        }
      } else {
        lambda *= 10.0;
        if (lambda > 1e20) {
          // No descent direction left: the current point is a numerical minimum.
          stalled = true;
          break;
        }
      }
    }
    if (stalled || res.converged) {
      res.converged = true;
      break;
    }
  }
  res.ssr = ssr;
  res.stderrs.assign(m, 0.0);
  if (n > m) {
    const double s2 = ssr / static_cast<double>(n - m);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    if (lu.isInvertible()) {
      const Eigen::MatrixXd cov = lu.inverse() * s2;
      for (std::size_t k = 0; k < m; ++k) {
        const double v = cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
        res.stderrs[k] = v > 0.0 ? std::sqrt(v) : 0.0;
      }
    } else {
      res.stderrs.assign(m, kInf);
    }
  }
  return res;
}

namespace {

// Fits run on values divided by their range so that results are
// equivariant under rescaling of the data.
std::vector<double> normalized(std::span<const double> values, double scale) {
  std::vector<double> y(values.begin(), values.end());
  for (double& v : y) v /= scale;
  return y;
}

DecayFit fit_exponential_unit(std::span<const double> times, std::span<const double> values);
SinusoidFit fit_damped_sinusoid_unit(std::span<const double> times, std::span<const double> values);

}  // namespace

DecayFit fit_exponential(std::span<const double> times, std::span<const double> values) {
  check_xy(times, values, 8, "fit_exponential");
  const double scale = range_of(values);
  if (is_constant(values)) return fit_exponential_unit(times, values);
  const std::vector<double> y = normalized(values, scale);
  DecayFit out = fit_exponential_unit(times, y);
  out.amplitude *= scale;
  out.offset *= scale;
  out.residual_rms *= scale;
  return out;
}

DecayFit fit_exponential_to_zero(std::span<const double> times, std::span<const double> values) {
  check_xy(times, values, 8, "fit_exponential_to_zero");
  const std::size_t n = times.size();
  DecayFit out;
  const double scale = std::max(std::abs(*std::max_element(values.begin(), values.end())),
                                std::abs(*std::min_element(values.begin(), values.end())));
  if (scale == 0.0) {
    out.status = FitStatus::kDegenerate;
    return out;
  }
  const std::vector<double> y = normalized(values, scale);
  const double t0 = times.front();
  const double default_rate = 1.0 / std::max(times.back() - t0, 1e-300);

  std::vector<std::vector<double>> starts;
  {  // log-linear over samples sharing the first sample's sign
    const double sign = y.front() >= 0.0 ? 1.0 : -1.0;
    std::vector<double> tx, ly;
    for (std::size_t i = 0; i < n; ++i) {
      if (sign * y[i] <= 0.0) break;
      tx.push_back(times[i]);
      ly.push_back(std::log(sign * y[i]));
    }
    if (tx.size() >= 2) {
      const auto [slope, icpt] = line(tx, ly);
      starts.push_back({sign * std::exp(icpt), std::max(-slope, 0.0)});
    }
  }
  {  // half-decay time
    double rate = default_rate;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs(y[i]) <= 0.5 * std::abs(y.front()) && times[i] > t0) {
        rate = std::log(2.0) / (times[i] - t0);
        break;
      }
    }
    starts.push_back({y.front() * std::exp(rate * t0), rate});
  }

  LeastSquaresResult best;
  best.ssr = kInf;
  bool have = false;
  for (auto& s : starts) {
    if (!all_finite(s)) continue;
    LeastSquaresResult r = levenberg_marquardt(exp_zero_model, times, y, s);
    if (!all_finite(r.params)) continue;
    if (!have || (r.converged && !best.converged) ||
        (r.converged == best.converged && r.ssr < best.ssr)) {
      best = std::move(r);
      have = true;
    }
  }
  if (!have) return out;
  out.amplitude = best.params[0] * scale;
  out.rate = best.params[1];
  out.offset = 0.0;
  out.rate_stderr = best.stderrs[1];
  out.residual_rms = std::sqrt(best.ssr / static_cast<double>(n)) * scale;
  out.status = best.converged ? FitStatus::kConverged : FitStatus::kNotConverged;
  return out;
}

SinusoidFit fit_damped_sinusoid(std::span<const double> times, std::span<const double> values) {
  check_xy(times, values, 8, "fit_damped_sinusoid");
  const double scale = range_of(values);
  if (is_constant(values)) return fit_damped_sinusoid_unit(times, values);
  const std::vector<double> y = normalized(values, scale);
  SinusoidFit out = fit_damped_sinusoid_unit(times, y);
  out.amplitude *= scale;
  out.offset *= scale;
  out.residual_rms *= scale;
  return out;
}

namespace {

DecayFit fit_exponential_unit(std::span<const double> times, std::span<const double> values) {
  const std::size_t n = times.size();
  DecayFit out;
  if (is_constant(values)) {
    out.rate = 0.0;
    out.amplitude = 0.0;
    out.offset = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    out.status = FitStatus::kDegenerate;
    return out;
  }
  const double t0 = times.front();
  const double span_t = times.back() - t0;
  const double y0 = values.front();
  const double y1 = values.back();
  const double a0 = y0 - y1;
  const double default_rate = 1.0 / std::max(span_t, 1e-300);

  std::vector<std::vector<double>> starts;
  {  // half-range
    double rate = default_rate;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs(values[i] - y1) <= 0.5 * std::abs(a0) && times[i] > t0) {
        rate = std::log(2.0) / (times[i] - t0);
        break;
      }
    }
    starts.push_back({a0 * std::exp(rate * t0), rate, y1});
  }
  {  // log-linear against an offset just beyond the last sample
    const double b = y1 - 0.1 * a0;
    const double sign = a0 >= 0.0 ? 1.0 : -1.0;
    std::vector<double> tx, ly;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = sign * (values[i] - b);
      if (v > 0.0) {
        tx.push_back(times[i]);
        ly.push_back(std::log(v));
      }
    }
    if (tx.size() >= 2) {
      const auto [slope, icpt] = line(tx, ly);
      const double rate = slope < 0.0 ? -slope : default_rate;
      starts.push_back({sign * std::exp(icpt), rate, b});
    }
  }
  {  // initial slope
    const std::size_t k = std::min<std::size_t>(4, n);
    const auto [slope, icpt] = line(times.subspan(0, k), values.subspan(0, k));
    (void)icpt;
    double rate = a0 != 0.0 ? -slope / a0 : default_rate;
    if (!(rate > 0.0) || !std::isfinite(rate)) rate = default_rate;
    starts.push_back({a0 * std::exp(rate * t0), rate, y1});
  }

  const ModelFn model = exp_model;
  LeastSquaresResult best;
  best.ssr = kInf;
  bool have = false;
  for (auto& s : starts) {
    if (!all_finite(s)) continue;
    LeastSquaresResult r = levenberg_marquardt(model, times, values, s);
    if (!all_finite(r.params)) continue;
    const bool better = !have || (r.converged && !best.converged) ||
                        (r.converged == best.converged && r.ssr < best.ssr);
    if (better) {
      best = std::move(r);
      have = true;
    }
  }
  if (!have) return out;
  out.amplitude = best.params[0];
  out.rate = best.params[1];
  out.offset = best.params[2];
  out.rate_stderr = best.stderrs[1];
  out.residual_rms = std::sqrt(best.ssr / static_cast<double>(n));
  out.status = best.converged ? FitStatus::kConverged : FitStatus::kNotConverged;
  return out;
}

}  // namespace

double spectrum_peak_frequency(std::span<const double> times, std::span<const double> values) {
  check_xy(times, values, 4, "spectrum_peak_frequency");
  const std::size_t n = times.size();
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  const double span_t = times.back() - times.front();
  if (!(span_t > 0.0)) throw std::invalid_argument("spectrum_peak_frequency: zero time span");
  const double nyquist = 0.5 / median_spacing(times);
  const double df = 0.05 / span_t;
  auto power = [&](double f) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i)
      acc += (values[i] - mean) * std::polar(1.0, -kTwoPi * f * times[i]);
    return std::norm(acc);
  };
  double best_f = df, best_p = -1.0;
  std::vector<double> grid;
  for (double f = 0.5 / span_t; f <= nyquist; f += df) grid.push_back(f);
  std::vector<double> pw(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    pw[k] = power(grid[k]);
    if (pw[k] > best_p) {
      best_p = pw[k];
      best_f = grid[k];
    }
  }
  // Parabolic refinement around the grid maximum.
  const auto k = static_cast<std::size_t>(std::find(grid.begin(), grid.end(), best_f) - grid.begin());
  if (k > 0 && k + 1 < grid.size()) {
    const double a = pw[k - 1], b = pw[k], c = pw[k + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) best_f += 0.5 * df * (a - c) / denom;
  }
  return best_f;
}

namespace {

SinusoidFit fit_damped_sinusoid_unit(std::span<const double> times, std::span<const double> values) {
  const std::size_t n = times.size();
  SinusoidFit out;
  if (is_constant(values)) {
    out.offset = values.front();
    out.decay_time = kInf;
    out.status = FitStatus::kDegenerate;
    return out;
  }
  const double span_t = times.back() - times.front();
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  const double f0 = spectrum_peak_frequency(times, values);
  std::complex<double> x{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i)
    x += (values[i] - mean) * std::polar(1.0, -kTwoPi * f0 * times[i]);
  const double a0 = 2.0 * std::abs(x) / static_cast<double>(n);
  const double phi0 = std::arg(x);

  // Envelope: max |y - mean| per period-long chunk.
  std::vector<double> env_t, env_v;
  const double period = 1.0 / f0;
  for (double start = times.front(); start < times.back(); start += period) {
    double peak = -1.0, at = start;
    for (std::size_t i = 0; i < n; ++i) {
      if (times[i] >= start && times[i] < start + period && std::abs(values[i] - mean) > peak) {
        peak = std::abs(values[i] - mean);
        at = times[i];
      }
    }
    if (peak > 0.0) {
      env_t.push_back(at);
      env_v.push_back(peak);
    }
  }
  std::vector<double> lambdas{0.0};
  if (env_v.size() >= 2) {
    double lam = 1.0 / span_t;
    for (std::size_t i = 1; i < env_v.size(); ++i)
      if (env_v[i] <= 0.5 * env_v.front()) {
        lam = std::log(2.0) / (env_t[i] - env_t.front());
        break;
      }
    lambdas.push_back(lam);
    std::vector<double> le(env_v.size());
    for (std::size_t i = 0; i < env_v.size(); ++i) le[i] = std::log(env_v[i]);
    const auto [slope, icpt] = line(env_t, le);
    (void)icpt;
    lambdas.push_back(std::max(0.0, -slope));
  } else {
    lambdas.push_back(1.0 / span_t);
    lambdas.push_back(3.0 / span_t);
  }

  const ModelFn model = sin_model;
  LeastSquaresResult best;
  best.ssr = kInf;
  bool have = false;
  for (double lam : lambdas) {
    std::vector<double> s{a0 * std::exp(lam * times.front()), lam, f0, phi0, mean};
    LeastSquaresResult r = levenberg_marquardt(model, times, values, s);
    if (!all_finite(r.params)) continue;
    const bool better = !have || (r.converged && !best.converged) ||
                        (r.converged == best.converged && r.ssr < best.ssr);
    if (better) {
      best = std::move(r);
      have = true;
    }
  }
  if (!have) return out;
  double amp = best.params[0], lam = best.params[1], f = best.params[2], phi = best.params[3];
  if (f < 0.0) {
    f = -f;
    phi = -phi;
  }
  if (amp < 0.0) {
    amp = -amp;
    phi += kPi;
  }
  out.amplitude = amp;
  out.frequency = f;
  out.phase = wrap_phase(phi);
  out.offset = best.params[4];
  out.decay_time = lam > 0.0 ? 1.0 / lam : kInf;
  out.frequency_stderr = best.stderrs[2];
  out.residual_rms = std::sqrt(best.ssr / static_cast<double>(n));
  out.status = best.converged ? FitStatus::kConverged : FitStatus::kNotConverged;

  double max_gap = 0.0;
  for (std::size_t i = 1; i < n; ++i) max_gap = std::max(max_gap, times[i] - times[i - 1]);
  const double nyquist = 0.5 / median_spacing(times);
  if (out.converged()) {
    if (f >= nyquist * (1.0 - 1e-9)) {
      out.status = FitStatus::kAliased;
    } else if (f * span_t < 3.0 || 1.0 / (f * max_gap) < 4.0) {
      out.status = FitStatus::kInsufficientCoverage;
    }
  }
  return out;
}

}  // namespace

PowerDecayFit fit_power_decay(std::span<const double> x, std::span<const double> y) {
  check_xy(x, y, 3, "fit_power_decay");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (y[i] > 0.0) {
      lx.push_back(x[i]);
      ly.push_back(std::log(y[i]));
    }
  double a0 = y.front(), p0 = 0.99;
  if (lx.size() >= 2) {
    const auto [slope, icpt] = line(lx, ly);
    a0 = std::exp(icpt);
    p0 = std::exp(slope);
  }
  const ModelFn model = [](std::span<const double> p, double m, std::span<double> g) {
    const double pm = std::pow(p[1], m);
    g[0] = pm;
    g[1] = m == 0.0 ? 0.0 : p[0] * m * std::pow(p[1], m - 1.0);
    return p[0] * pm;
  };
  const LeastSquaresResult r = levenberg_marquardt(model, x, y, {a0, p0});
  PowerDecayFit out;
  out.amplitude = r.params[0];
  out.p = r.params[1];
  out.amplitude_stderr = r.stderrs[0];
  out.p_stderr = r.stderrs[1];
  out.converged = r.converged && all_finite(r.params);
  return out;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  check_xy(x, y, 3, "linear_fit");
  const std::size_t n = x.size();
  const double nn = static_cast<double>(n);
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / nn;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / nn;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("linear_fit: x values are all equal");
  LinearFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += r * r;
  }
  const double s2 = ssr / (nn - 2.0);
  f.slope_stderr = std::sqrt(s2 / sxx);
  f.intercept_stderr = std::sqrt(s2 * (1.0 / nn + mx * mx / sxx));
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  return f;
}

double jackknife_stderr(std::span<const double> loo) {
  const std::size_t g = loo.size();
  if (g < 2) throw std::invalid_argument("jackknife_stderr: need at least two estimates");
  const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / static_cast<double>(g);
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return std::sqrt(static_cast<double>(g - 1) / static_cast<double>(g) * ss);
}

}  // namespace dressed::fitting
