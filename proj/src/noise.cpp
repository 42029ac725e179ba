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

#include "dressed/noise.hpp"

#include <fftw3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>

#include "dressed/algebra.hpp"
#include "dressed/io.hpp"
#include "dressed/kernels/kernels.hpp"
#include "dressed/rng.hpp"

namespace dressed::noise {

namespace {

// Relative slack on the sampling preconditions so that values computed from
// the same formula in another unit system are not rejected by round-off.
constexpr double kRelSlack = 1e-9;

void require(bool ok, const std::string& msg) {
  if (!ok) throw NoiseError(msg);
}

bool is_power_of_two(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

}  // namespace

// --- NoiseSpectrum ----------------------------------------------------------

NoiseSpectrum NoiseSpectrum::flat_band(double band_low, double band_high, double level) {
  require(std::isfinite(band_low) && std::isfinite(band_high) && std::isfinite(level),
          "flat_band: non-finite parameter");
  require(band_low >= 0.0, "flat_band: band_low must be >= 0");
  require(band_low < band_high, "flat_band: band_low must be < band_high");
  require(level >= 0.0, "flat_band: level must be >= 0");
  NoiseSpectrum s;
  s.kind_ = SpectrumKind::kFlatBand;
  s.band_low_ = band_low;
  s.band_high_ = band_high;
  s.level_ = level;
  return s;
}

NoiseSpectrum NoiseSpectrum::tabulated(std::vector<SpectrumPoint> table) {
  require(table.size() >= 2, "tabulated: need at least two points");
  for (std::size_t i = 0; i < table.size(); ++i) {
    require(std::isfinite(table[i].omega) && std::isfinite(table[i].psd),
            "tabulated: non-finite entry");
    require(table[i].omega >= 0.0, "tabulated: omega must be >= 0");
    require(table[i].psd >= 0.0, "tabulated: psd must be >= 0");
    if (i > 0) require(table[i].omega > table[i - 1].omega, "tabulated: omega must increase");
  }
  NoiseSpectrum s;
  s.kind_ = SpectrumKind::kTabulated;
  s.band_low_ = table.front().omega;
  s.band_high_ = table.back().omega;
  s.level_ = 0.0;
  for (const auto& p : table) s.level_ = std::max(s.level_, p.psd);
  s.table_ = std::move(table);
  return s;
}

double NoiseSpectrum::operator()(double omega) const {
  const double w = std::abs(omega);
  if (kind_ == SpectrumKind::kFlatBand) {
    return (w >= band_low_ && w <= band_high_) ? level_ : 0.0;
  }
  if (w < table_.front().omega || w > table_.back().omega) return 0.0;
  auto it = std::lower_bound(table_.begin(), table_.end(), w,
                             [](const SpectrumPoint& p, double x) { return p.omega < x; });
  if (it == table_.begin()) return it->psd;
  const SpectrumPoint& b = *it;
  const SpectrumPoint& a = *(it - 1);
  const double f = (w - a.omega) / (b.omega - a.omega);
  return a.psd + f * (b.psd - a.psd);
}

NoiseSpectrum NoiseSpectrum::scaled(double factor) const {
  require(factor >= 0.0 && std::isfinite(factor), "scaled: factor must be finite and >= 0");
  if (kind_ == SpectrumKind::kFlatBand) return flat_band(band_low_, band_high_, level_ * factor);
  std::vector<SpectrumPoint> t = table_;
  for (auto& p : t) p.psd *= factor;
  return tabulated(std::move(t));
}

bool NoiseSpectrum::is_zero() const {
  if (kind_ == SpectrumKind::kFlatBand) return level_ == 0.0;
  return std::all_of(table_.begin(), table_.end(), [](const SpectrumPoint& p) { return p.psd == 0.0; });
}

double NoiseSpectrum::variance() const {
  if (kind_ == SpectrumKind::kFlatBand) return level_ * (band_high_ - band_low_) / kPi;
  double area = 0.0;
  for (std::size_t i = 1; i < table_.size(); ++i) {
    area += 0.5 * (table_[i].psd + table_[i - 1].psd) * (table_[i].omega - table_[i - 1].omega);
  }
  return area / kPi;  // 2 * area / (2 pi)
}

std::pair<double, double> NoiseSpectrum::support() const {
  if (kind_ == SpectrumKind::kFlatBand) return {band_low_, band_high_};
  std::size_t first = table_.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < table_.size(); ++i) {
    if (table_[i].psd > 0.0) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first == table_.size()) return {0.0, 0.0};
  // Power that reaches down to DC is bounded below by the first grid line.
  double lo = table_[first].omega;
  if (lo == 0.0) lo = table_[1].omega;
  return {lo, table_[last].omega};
}

// --- synthesis --------------------------------------------------------------

double minimum_synthesis_duration(const NoiseSpectrum& spec) {
  if (spec.is_zero()) return 0.0;
  const auto [lo, hi] = spec.support();
  const double for_low = 10.0 * kTwoPi / lo;
  const double for_bins = (static_cast<double>(kMinCombBins) + 1.0) * kTwoPi / (hi - lo);
  return std::max(for_low, for_bins);
}

namespace {

struct Comb {
  std::vector<double> amp, omega, phase;
  std::vector<std::size_t> index;  // line number k, omega = k * dw
  std::size_t n = 0;               // samples covering the duration
};

std::mutex& planner_mutex() {
  // FFTW planner calls are not thread-safe; execution is.
  static std::mutex m;
  return m;
}

Comb build_comb(const NoiseSpectrum& spec, double duration, double dt, NoiseSeed seed) {
  require(dt > 0.0 && std::isfinite(dt), "synthesize: dt must be > 0");
  require(duration > 0.0 && std::isfinite(duration), "synthesize: duration must be > 0");
  Comb c;
  c.n = static_cast<std::size_t>(std::ceil(duration / dt * (1.0 - 1e-12)));
  require(c.n >= 2, "synthesize: fewer than two samples");
  if (spec.is_zero()) return c;

  const auto [lo, hi] = spec.support();
  require(dt <= kTwoPi / (10.0 * hi) * (1.0 + kRelSlack),
          "synthesize: dt exceeds 2pi/(10*band_high)");
  require(duration >= 10.0 * kTwoPi / lo * (1.0 - kRelSlack),
          "synthesize: duration shorter than 10*2pi/band_low");

  const double dw = kTwoPi / duration;
  const auto k_max = static_cast<std::size_t>(std::floor(hi / dw)) + 1;
  for (std::size_t k = 1; k <= k_max; ++k) {
    const double w = dw * static_cast<double>(k);
    // Flat bands take lines on [lo, hi) so the comb carries exactly
    // (number of lines) * dw of bandwidth.
    if (spec.kind() == SpectrumKind::kFlatBand && !(w >= lo && w < hi)) continue;
    const double s = spec(w);
    if (s <= 0.0) continue;
    c.amp.push_back(std::sqrt(2.0 * s * dw / kPi));
    c.omega.push_back(w);
    c.index.push_back(k);
  }
  require(c.amp.size() >= kMinCombBins,
          "synthesize: fewer than " + std::to_string(kMinCombBins) +
              " comb lines in band; increase duration");
  RandomStream rng(seed.master, {seed.stream});
  c.phase.resize(c.amp.size());
  for (double& p : c.phase) p = kTwoPi * rng.uniform();
  return c;
}

NoiseTrajectory empty_trajectory(const Comb& c, double dt, NoiseSeed seed, std::size_t max_samples) {
  NoiseTrajectory traj;
  traj.dt = dt;
  traj.seed = seed;
  traj.samples.assign(max_samples > 0 ? std::min(max_samples, c.n) : c.n, 0.0);
  return traj;
}

}  // namespace

double fft_friendly_duration(double min_duration, double dt) {
  require(dt > 0.0 && min_duration > 0.0, "fft_friendly_duration: inputs must be > 0");
  const auto need = static_cast<std::size_t>(std::ceil(min_duration / dt * (1.0 - 1e-12)));
  for (std::size_t n = std::max<std::size_t>(need, 2);; ++n) {
    std::size_t r = n;
    for (std::size_t p : {2, 3, 5, 7})
      while (r % p == 0) r /= p;
    if (r == 1) return static_cast<double>(n) * dt;
  }
}

NoiseTrajectory synthesize_direct(const NoiseSpectrum& spec, double duration, double dt,
                                  NoiseSeed seed, std::size_t max_samples) {
  const Comb c = build_comb(spec, duration, dt, seed);
  NoiseTrajectory traj = empty_trajectory(c, dt, seed, max_samples);
  if (c.amp.empty()) return traj;
  kernels::active().cosine_comb(c.amp.data(), c.omega.data(), c.phase.data(), c.amp.size(), 0.0,
                                dt, traj.samples.data(), traj.samples.size());
  return traj;
}

NoiseTrajectory synthesize(const NoiseSpectrum& spec, double duration, double dt, NoiseSeed seed,
                           std::size_t max_samples) {
  const Comb c = build_comb(spec, duration, dt, seed);
  const bool on_grid = std::abs(static_cast<double>(c.n) * dt - duration) <= 1e-9 * duration;
  if (c.amp.empty() || !on_grid) return synthesize_direct(spec, duration, dt, seed, max_samples);

  NoiseTrajectory traj = empty_trajectory(c, dt, seed, max_samples);
  // x_m = sum_k A_k cos(2 pi k m / n + phi_k) = c2r of X_k = A_k e^{i phi_k} / 2.
  const std::size_t n = c.n;
  const std::size_t half = n / 2 + 1;
  auto* spec_buf = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * half));
  auto* out = static_cast<double*>(fftw_malloc(sizeof(double) * n));
  if (spec_buf == nullptr || out == nullptr) {
    fftw_free(spec_buf);
    fftw_free(out);
    throw std::bad_alloc();
  }
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(n), spec_buf, out, FFTW_ESTIMATE);
  }
  std::fill_n(reinterpret_cast<double*>(spec_buf), 2 * half, 0.0);
  for (std::size_t i = 0; i < c.amp.size(); ++i) {
    const std::size_t k = c.index[i];
    if (2 * k >= n) throw NoiseError("synthesize: comb line at or above Nyquist");
    spec_buf[k][0] = 0.5 * c.amp[i] * std::cos(c.phase[i]);
    spec_buf[k][1] = 0.5 * c.amp[i] * std::sin(c.phase[i]);
  }
  fftw_execute(plan);
  std::copy_n(out, traj.samples.size(), traj.samples.begin());
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(spec_buf);
  fftw_free(out);
  return traj;
}

// --- estimation -------------------------------------------------------------

NoiseSpectrum estimate_psd(const NoiseTrajectory& traj, std::size_t segment_len) {
  require(is_power_of_two(segment_len), "estimate_psd: segment_len must be a power of two");
  require(traj.dt > 0.0, "estimate_psd: dt must be > 0");
  require(traj.samples.size() >= segment_len, "estimate_psd: trajectory shorter than one segment");
  const std::size_t m = segment_len;
  const std::size_t n_seg = traj.samples.size() / m;
  const std::size_t half = m / 2;

  std::vector<double> in(m);
  std::vector<std::complex<double>> out(half + 1);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(m), in.data(),
                                reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  }
  if (plan == nullptr) throw std::runtime_error("estimate_psd: FFTW planning failed");

  std::vector<double> acc(half + 1, 0.0);
  const double scale = traj.dt / static_cast<double>(m) / static_cast<double>(n_seg);
  const auto& kt = kernels::active();
  for (std::size_t s = 0; s < n_seg; ++s) {
    std::copy_n(traj.samples.begin() + static_cast<std::ptrdiff_t>(s * m), m, in.begin());
    fftw_execute_dft_r2c(plan, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
    kt.accumulate_power(out.data(), acc.data(), half + 1, scale);
  }
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }

  std::vector<SpectrumPoint> table(half + 1);
  const double dw = kTwoPi / (static_cast<double>(m) * traj.dt);
  for (std::size_t k = 0; k <= half; ++k) table[k] = {dw * static_cast<double>(k), acc[k]};
  return NoiseSpectrum::tabulated(std::move(table));
}

NoiseTrajectory gate_window(const NoiseTrajectory& traj, double t_on, double t_off) {
  require(t_on >= 0.0, "gate_window: t_on must be >= 0");
  require(t_on < t_off, "gate_window: t_on must be < t_off");
  require(t_off <= traj.duration() * (1.0 + kRelSlack), "gate_window: t_off beyond trajectory");
  NoiseTrajectory out = traj;
  for (std::size_t k = 0; k < out.samples.size(); ++k) {
    const double t = out.time(k);
    if (t < t_on || t >= t_off) out.samples[k] = 0.0;
  }
  return out;
}

// --- CSV --------------------------------------------------------------------

void write_spectrum_csv(std::ostream& out, const NoiseSpectrum& spec) {
  out << kSpectrumCsvHeader << '\n';
  if (spec.kind() == SpectrumKind::kTabulated) {
    for (const auto& p : spec.table()) {
      out << io::format_double(p.omega) << ',' << io::format_double(p.psd) << '\n';
    }
    return;
  }
  // Flat band as a four-point table with vertical edges one ulp wide.
  const double lo = spec.band_low(), hi = spec.band_high(), s0 = spec.level();
  const double lo_out = std::nextafter(lo, 0.0);
  const double hi_out = std::nextafter(hi, hi * 2.0 + 1.0);
  if (lo_out < lo) out << io::format_double(lo_out) << ",0\n";
  out << io::format_double(lo) << ',' << io::format_double(s0) << '\n';
  out << io::format_double(hi) << ',' << io::format_double(s0) << '\n';
  out << io::format_double(hi_out) << ",0\n";
}

NoiseSpectrum read_spectrum_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "read_spectrum_csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == kSpectrumCsvHeader,
          std::string("read_spectrum_csv: expected header '") + kSpectrumCsvHeader + "'");
  std::vector<SpectrumPoint> table;
  std::size_t line_no = 1;
  auto parse = [&](const char* first, const char* last, double& v) {
    while (first < last && *first == ' ') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    while (ptr < last && *ptr == ' ') ++ptr;
    require(ec == std::errc() && ptr == last,
            "read_spectrum_csv: bad number on line " + std::to_string(line_no));
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos && line.find(',', comma + 1) == std::string::npos,
            "read_spectrum_csv: expected two columns on line " + std::to_string(line_no));
    SpectrumPoint p{};
    parse(line.data(), line.data() + comma, p.omega);
    parse(line.data() + comma + 1, line.data() + line.size(), p.psd);
    table.push_back(p);
  }
  return NoiseSpectrum::tabulated(std::move(table));
}

void write_trajectory_csv(std::ostream& out, const NoiseTrajectory& traj) {
  out << kTrajectoryCsvHeader << '\n';
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    out << io::format_double(traj.time(k)) << ',' << io::format_double(traj.samples[k]) << '\n';
  }
}

// --- calibration ------------------------------------------------------------

void PowerCalibration::validate() const {
  std::ostringstream err;
  if (!(sigma_v >= 0.0)) err << " sigma_v must be >= 0;";
  if (!(impedance_ohm > 0.0)) err << " impedance_ohm must be > 0;";
  if (!(chain_factor > 0.0)) err << " chain_factor must be > 0;";
  if (!(freq_sensitivity_hz_per_v > 0.0)) err << " freq_sensitivity_hz_per_v must be > 0;";
  if (!(rbw_hz > 0.0)) err << " rbw_hz must be > 0;";
  const std::string msg = err.str();
  if (!msg.empty()) throw NoiseError("PowerCalibration:" + msg);
}

double output_power(double sigma_v, double impedance_ohm) {
  require(sigma_v >= 0.0, "output_power: sigma must be >= 0");
  require(impedance_ohm > 0.0, "output_power: impedance must be > 0");
  return sigma_v * sigma_v / impedance_ohm;
}

double psd_from_analyzer(double p_avg_dbm, const PowerCalibration& cal) {
  cal.validate();
  const double p_watts_per_rbw = std::pow(10.0, (p_avg_dbm - 30.0) / 10.0) / cal.rbw_hz;
  const double k = kTwoPi * cal.freq_sensitivity_hz_per_v;
  return cal.chain_factor * p_watts_per_rbw * cal.impedance_ohm * k * k;
}

}  // namespace dressed::noise
