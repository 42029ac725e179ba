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

#include "dressed/dynamics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "dressed/io.hpp"
#include "dressed/kernels/kernels.hpp"

namespace dressed::dynamics {

namespace {

constexpr double kGridTol = 1e-9;

std::size_t steps_for(double duration, double dt, const char* what) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument(std::string(what) + ": dt must be > 0");
  if (!(duration >= 0.0) || !std::isfinite(duration))
    throw std::invalid_argument(std::string(what) + ": duration must be >= 0");
  const double x = duration / dt;
  const double r = std::round(x);
  if (std::abs(x - r) > kGridTol * std::max(1.0, x))
    throw std::invalid_argument(std::string(what) + ": duration is not a multiple of dt");
  return static_cast<std::size_t>(r);
}

// Step indices at which to record, ascending, with the matching times.
std::vector<std::size_t> record_steps(const std::vector<double>& times, std::size_t n_steps,
                                      double dt, const char* what) {
  std::vector<std::size_t> steps;
  if (times.empty()) {
    steps.resize(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) steps[k] = k;
    return steps;
  }
  steps.reserve(times.size());
  for (double t : times) {
    const std::size_t k = steps_for(t, dt, what);
    if (k > n_steps) throw std::invalid_argument(std::string(what) + ": record time beyond duration");
    if (!steps.empty() && k <= steps.back())
      throw std::invalid_argument(std::string(what) + ": record times must increase");
    steps.push_back(k);
  }
  return steps;
}

double expectation(const std::vector<cplx>& rho_vec, const ComplexMatrix& op) {
  const std::size_t d = op.rows();
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) acc += (rho_vec[i * d + j] * op(j, i)).real();
  return acc;
}

double expectation_pure(const std::vector<cplx>& psi, const ComplexMatrix& op) {
  const std::size_t d = op.rows();
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < d; ++i) {
    cplx row{0.0, 0.0};
    for (std::size_t j = 0; j < d; ++j) row += op(i, j) * psi[j];
    acc += std::conj(psi[i]) * row;
  }
  return acc.real();
}

cplx vec_trace(const std::vector<cplx>& v, std::size_t d) {
  cplx t{0.0, 0.0};
  for (std::size_t i = 0; i < d; ++i) t += v[i * d + i];
  return t;
}

ComplexMatrix outer(const std::vector<cplx>& psi) {
  const std::size_t d = psi.size();
  ComplexMatrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = psi[i] * std::conj(psi[j]);
  return m;
}

void init_result(EvolutionResult& r, const EvolveOptions& o, const std::vector<std::size_t>& steps,
                 double dt) {
  r.times.reserve(steps.size());
  for (std::size_t k : steps) r.times.push_back(dt * static_cast<double>(k));
  for (const auto& ob : o.observables) r.observables.push_back({ob.name, {}});
  r.min_eigenvalue = std::numeric_limits<double>::infinity();
}

void check_observables(const std::vector<Observable>& obs, std::size_t d) {
  for (const auto& o : obs)
    if (o.op.rows() != d || o.op.cols() != d)
      throw DimensionError("observable '" + o.name + "' has the wrong dimension");
}

// Exact exponential of H0 + x N for one sample. When both operators are a
// 2x2 leading block plus a diagonal remainder, the block uses the closed form.
class StepExponentiator {
 public:
  StepExponentiator(const ComplexMatrix& h0, const std::optional<ComplexMatrix>& n)
      : h0_(h0), n_(n ? *n : ComplexMatrix(h0.rows(), h0.cols())), d_(h0.rows()) {
    block_ = d_ >= 2 && is_block(h0_) && is_block(n_);
  }

  void fill(double x, double dt, ComplexMatrix& u) const {
    if (!block_) {
      u = hermitian_expm(h0_ + n_ * cplx{x, 0.0}, dt);
      return;
    }
    const auto h = [&](std::size_t i, std::size_t j) { return h0_(i, j) + x * n_(i, j); };
    const double a = 0.5 * (h(0, 0).real() + h(1, 1).real());
    const double bz = 0.5 * (h(0, 0).real() - h(1, 1).real());
    const cplx off = h(0, 1);  // = bx - i by
    const double nb = std::sqrt(std::norm(off) + bz * bz);
    const double c = std::cos(dt * nb);
    const double sinc = nb > 1e-300 ? std::sin(dt * nb) / nb : dt;
    const cplx phase = std::polar(1.0, -dt * a);
    const cplx mi{0.0, -1.0};
    if (u.rows() != d_) u = ComplexMatrix(d_, d_);
    u(0, 0) = phase * (c + mi * sinc * bz);
    u(1, 1) = phase * (c - mi * sinc * bz);
    u(0, 1) = phase * (mi * sinc * off);
    u(1, 0) = phase * (mi * sinc * std::conj(off));
    for (std::size_t k = 2; k < d_; ++k) u(k, k) = std::polar(1.0, -dt * h(k, k).real());
  }

 private:
  bool is_block(const ComplexMatrix& m) const {
    for (std::size_t i = 0; i < d_; ++i)
      for (std::size_t j = 0; j < d_; ++j) {
        if (i < 2 && j < 2) continue;
        if (i != j && m(i, j) != cplx{0.0, 0.0}) return false;
      }
    return true;
  }

  ComplexMatrix h0_;
  ComplexMatrix n_;
  std::size_t d_;
  bool block_ = false;
};

// rho <- u rho u^dagger on a row-major vectorized d x d matrix.
void conjugate_in_place(const ComplexMatrix& u, std::vector<cplx>& rho, std::vector<cplx>& tmp) {
  const std::size_t d = u.rows();
  tmp.assign(d * d, cplx{0.0, 0.0});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const cplx uik = u(i, k);
      if (uik == cplx{0.0, 0.0}) continue;
      for (std::size_t j = 0; j < d; ++j) tmp[i * d + j] += uik * rho[k * d + j];
    }
  std::fill(rho.begin(), rho.end(), cplx{0.0, 0.0});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const cplx t = tmp[i * d + k];
      for (std::size_t j = 0; j < d; ++j) rho[i * d + j] += t * std::conj(u(j, k));
    }
}

ComplexMatrix super_identity(std::size_t d) { return ComplexMatrix::identity(d * d); }

double noise_step_limit(const ComplexMatrix& h0) {
  const double rho = spectral_radius(h0);
  if (rho == 0.0) return std::numeric_limits<double>::infinity();
  // >= 10 steps per period of the largest level spacing (bounded by 2 rho).
  return kTwoPi / (10.0 * 2.0 * rho);
}

// Shared driver for stochastic evolutions over a sample window.
struct NoisyCore {
  const LindbladSpec& spec;
  const double* samples;
  std::size_t n_steps;
  double dt;
};

template <class OnRecord>
void run_unitary(const NoisyCore& c, std::vector<cplx>& psi, const std::vector<std::size_t>& steps,
                 OnRecord on_record) {
  const std::size_t d = c.spec.dim();
  StepExponentiator expm(c.spec.hamiltonian, c.spec.noise_operator);
  const auto& kt = kernels::active();
  ComplexMatrix u(d, d);
  std::vector<cplx> next(d);
  std::size_t r = 0;
  for (std::size_t k = 0; k <= c.n_steps; ++k) {
    while (r < steps.size() && steps[r] == k) on_record(r++, psi);
    if (k == c.n_steps) break;
    expm.fill(c.samples[k], c.dt, u);
    kt.complex_matvec(u.entries().data(), psi.data(), next.data(), d);
    psi.swap(next);
  }
}

template <class OnRecord>
void run_density(const NoisyCore& c, const ComplexMatrix& d_half, std::vector<cplx>& rho,
                 const std::vector<std::size_t>& steps, OnRecord on_record) {
  const std::size_t d = c.spec.dim();
  const std::size_t d2 = d * d;
  StepExponentiator expm(c.spec.hamiltonian, c.spec.noise_operator);
  const auto& kt = kernels::active();
  ComplexMatrix u(d, d);
  std::vector<cplx> next(d2), tmp(d2);
  const bool dissipative = !c.spec.jumps.empty();
  std::size_t r = 0;
  for (std::size_t k = 0; k <= c.n_steps; ++k) {
    while (r < steps.size() && steps[r] == k) on_record(r++, rho);
    if (k == c.n_steps) break;
    expm.fill(c.samples[k], c.dt, u);
    if (dissipative) {
      kt.complex_matvec(d_half.entries().data(), rho.data(), next.data(), d2);
      rho.swap(next);
    }
    conjugate_in_place(u, rho, tmp);
    if (dissipative) {
      kt.complex_matvec(d_half.entries().data(), rho.data(), next.data(), d2);
      rho.swap(next);
    }
  }
}

ComplexMatrix half_step_dissipator(const LindbladSpec& spec, double dt) {
  if (spec.jumps.empty()) return super_identity(spec.dim());
  return general_expm(dissipator_superop(spec) * cplx{0.5 * dt, 0.0});
}

}  // namespace

const std::vector<double>& EvolutionResult::series(const std::string& name) const {
  for (const auto& s : observables)
    if (s.name == name) return s.values;
  throw std::out_of_range("EvolutionResult: no observable named '" + name + "'");
}

const std::vector<double>& EnsembleResult::mean(const std::string& name) const {
  for (const auto& s : mean_observables)
    if (s.name == name) return s.values;
  throw std::out_of_range("EnsembleResult: no observable named '" + name + "'");
}

const std::vector<double>& EnsembleResult::stderr_of(const std::string& name) const {
  for (const auto& s : standard_errors)
    if (s.name == name) return s.values;
  throw std::out_of_range("EnsembleResult: no observable named '" + name + "'");
}

double max_lindblad_step(const LindbladSpec& spec) {
  double limit = std::numeric_limits<double>::infinity();
  const double rho = spectral_radius(spec.hamiltonian);
  if (rho > 0.0) limit = std::min(limit, kTwoPi / (20.0 * rho));
  const double rate = spec.max_rate();
  if (rate > 0.0) limit = std::min(limit, 1.0 / (20.0 * rate));
  return limit;
}

double max_noise_step(const LindbladSpec& spec) { return noise_step_limit(spec.hamiltonian); }

ComplexMatrix dissipator_superop(const LindbladSpec& spec) {
  spec.validate();
  const std::size_t d = spec.dim();
  const ComplexMatrix id = ComplexMatrix::identity(d);
  ComplexMatrix l(d * d, d * d);
  for (const auto& j : spec.jumps) {
    if (j.rate == 0.0) continue;
    const ComplexMatrix ldl = j.op.adjoint() * j.op;
    ComplexMatrix term = kron(j.op, j.op.conjugate());
    term -= kron(ldl, id) * cplx{0.5, 0.0};
    term -= kron(id, ldl.transpose()) * cplx{0.5, 0.0};
    l += term * cplx{j.rate, 0.0};
  }
  return l;
}

ComplexMatrix lindblad_superop(const LindbladSpec& spec) {
  const std::size_t d = spec.dim();
  const ComplexMatrix id = ComplexMatrix::identity(d);
  ComplexMatrix l = dissipator_superop(spec);
  const ComplexMatrix& h = spec.hamiltonian;
  l += (kron(h, id) - kron(id, h.transpose())) * cplx{0.0, -1.0};
  return l;
}

EvolutionResult evolve_lindblad(const LindbladSpec& spec, const DensityMatrix& rho0,
                                double duration, double dt, const EvolveOptions& options) {
  spec.validate();
  const std::size_t d = spec.dim();
  if (rho0.dim() != d) throw DimensionError("evolve_lindblad: initial state dimension mismatch");
  check_observables(options.observables, d);
  const double limit = max_lindblad_step(spec);
  if (dt > limit * (1.0 + kGridTol))
    throw IntegrationError("evolve_lindblad: dt = " + io::format_double(dt) +
                           " exceeds the step limit " + io::format_double(limit));
  const std::size_t n_steps = steps_for(duration, dt, "evolve_lindblad");
  const auto steps = record_steps(options.record_times, n_steps, dt, "evolve_lindblad");

  const ComplexMatrix lsup = lindblad_superop(spec);
  const std::size_t n = d * d;
  const auto& kt = kernels::active();
  const cplx* lm = lsup.entries().data();

  EvolutionResult res;
  init_result(res, options, steps, dt);
  std::vector<cplx> v = vectorize(rho0.matrix());
  std::vector<cplx> k1(n), k2(n), k3(n), k4(n), tmp(n);
  const cplx tr0 = vec_trace(v, d);

  auto record = [&](const std::vector<cplx>& state) {
    for (std::size_t o = 0; o < options.observables.size(); ++o)
      res.observables[o].values.push_back(expectation(state, options.observables[o].op));
    const ComplexMatrix m = unvectorize(state, d);
    const double ev = min_eigenvalue(m);
    res.min_eigenvalue = std::min(res.min_eigenvalue, ev);
    if (ev < kPositivityFloor)
      throw IntegrationError("evolve_lindblad: eigenvalue " + io::format_double(ev) +
                             " below positivity floor");
    if (options.keep_states)
      res.states.push_back(DensityMatrix::from_numerical(m, kTraceTolerance, kPositivityFloor));
  };

  std::size_t r = 0;
  for (std::size_t k = 0; k <= n_steps; ++k) {
    while (r < steps.size() && steps[r] == k) {
      record(v);
      ++r;
    }
    if (k == n_steps) break;
    kt.complex_matvec(lm, v.data(), k1.data(), n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = v[i] + 0.5 * dt * k1[i];
    kt.complex_matvec(lm, tmp.data(), k2.data(), n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = v[i] + 0.5 * dt * k2[i];
    kt.complex_matvec(lm, tmp.data(), k3.data(), n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = v[i] + dt * k3[i];
    kt.complex_matvec(lm, tmp.data(), k4.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      v[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    const double drift = std::abs(vec_trace(v, d) - tr0);
    res.max_trace_drift = std::max(res.max_trace_drift, drift);
    if (drift > kTraceTolerance)
      throw IntegrationError("evolve_lindblad: trace drift " + io::format_double(drift) +
                             " exceeds tolerance");
  }

  if (options.check_convergence) {
    EvolveOptions half;
    half.record_times = {duration};
    half.keep_states = true;
    const EvolutionResult fine = evolve_lindblad(spec, rho0, duration, 0.5 * dt, half);
    const ComplexMatrix coarse = unvectorize(v, d);
    res.convergence_checked = true;
    res.convergence_delta = max_abs_diff(coarse, fine.states.back().matrix());
    res.converged = res.convergence_delta < kConvergenceTolerance;
  }
  return res;
}

ComplexMatrix lindblad_propagator(const LindbladSpec& spec, double duration, double dt) {
  spec.validate();
  const double limit = max_lindblad_step(spec);
  if (dt > limit * (1.0 + kGridTol))
    throw IntegrationError("lindblad_propagator: dt exceeds the step limit");
  const std::size_t n_steps = steps_for(duration, dt, "lindblad_propagator");
  const std::size_t d = spec.dim();
  const std::size_t n = d * d;
  // One RK4 step of a linear autonomous system is the degree-4 Taylor map.
  const ComplexMatrix hl = lindblad_superop(spec) * cplx{dt, 0.0};
  ComplexMatrix step = super_identity(d);
  ComplexMatrix power = super_identity(d);
  double fact = 1.0;
  for (int k = 1; k <= 4; ++k) {
    power = power * hl;
    fact *= k;
    step += power * cplx{1.0 / fact, 0.0};
  }
  ComplexMatrix prop = super_identity(d);
  for (std::size_t k = 0; k < n_steps; ++k) prop = step * prop;
  for (std::size_t col = 0; col < n; ++col) {
    cplx t{0.0, 0.0};
    for (std::size_t i = 0; i < d; ++i) t += prop(i * d + i, col);
    const bool diag = (col / d) == (col % d);
    if (std::abs(t - cplx{diag ? 1.0 : 0.0, 0.0}) > kTraceTolerance)
      throw IntegrationError("lindblad_propagator: trace not preserved");
  }
  return prop;
}

EvolutionResult evolve_noisy_unitary(const LindbladSpec& spec, const StateVector& psi0,
                                     const noise::NoiseTrajectory& traj, double duration,
                                     const EvolveOptions& options) {
  spec.validate();
  if (!spec.jumps.empty())
    throw std::invalid_argument("evolve_noisy_unitary: spec has jumps; use evolve_noisy_lindblad");
  const std::size_t d = spec.dim();
  if (psi0.dim() != d) throw DimensionError("evolve_noisy_unitary: state dimension mismatch");
  check_observables(options.observables, d);
  if (traj.dt > noise_step_limit(spec.hamiltonian) * (1.0 + kGridTol))
    throw std::invalid_argument("evolve_noisy_unitary: noise step too coarse for the Hamiltonian");
  const std::size_t n_steps = steps_for(duration, traj.dt, "evolve_noisy_unitary");
  if (n_steps > traj.samples.size())
    throw std::invalid_argument("evolve_noisy_unitary: trajectory shorter than duration");
  const auto steps = record_steps(options.record_times, n_steps, traj.dt, "evolve_noisy_unitary");

  EvolutionResult res;
  init_result(res, options, steps, traj.dt);
  std::vector<cplx> psi(psi0.amplitudes().begin(), psi0.amplitudes().end());
  run_unitary({spec, traj.samples.data(), n_steps, traj.dt}, psi, steps,
              [&](std::size_t, const std::vector<cplx>& s) {
                double n2 = 0.0;
                for (const auto& a : s) n2 += std::norm(a);
                const double drift = std::abs(1.0 - n2);
                res.max_trace_drift = std::max(res.max_trace_drift, drift);
                if (drift > kTraceTolerance)
                  throw IntegrationError("evolve_noisy_unitary: norm drift exceeds tolerance");
                for (std::size_t o = 0; o < options.observables.size(); ++o)
                  res.observables[o].values.push_back(expectation_pure(s, options.observables[o].op));
                res.min_eigenvalue = 0.0;
                if (options.keep_states)
                  res.states.push_back(
                      DensityMatrix::from_numerical(outer(s), kTraceTolerance, kPositivityFloor));
              });
  if (d == 1) res.min_eigenvalue = 1.0;
  return res;
}

EvolutionResult evolve_noisy_lindblad(const LindbladSpec& spec, const DensityMatrix& rho0,
                                      const noise::NoiseTrajectory& traj, double duration,
                                      const EvolveOptions& options) {
  spec.validate();
  const std::size_t d = spec.dim();
  if (rho0.dim() != d) throw DimensionError("evolve_noisy_lindblad: state dimension mismatch");
  check_observables(options.observables, d);
  if (traj.dt > noise_step_limit(spec.hamiltonian) * (1.0 + kGridTol))
    throw std::invalid_argument("evolve_noisy_lindblad: noise step too coarse for the Hamiltonian");
  const std::size_t n_steps = steps_for(duration, traj.dt, "evolve_noisy_lindblad");
  if (n_steps > traj.samples.size())
    throw std::invalid_argument("evolve_noisy_lindblad: trajectory shorter than duration");
  const auto steps = record_steps(options.record_times, n_steps, traj.dt, "evolve_noisy_lindblad");

  EvolutionResult res;
  init_result(res, options, steps, traj.dt);
  const ComplexMatrix d_half = half_step_dissipator(spec, traj.dt);
  std::vector<cplx> rho = vectorize(rho0.matrix());
  run_density({spec, traj.samples.data(), n_steps, traj.dt}, d_half, rho, steps,
              [&](std::size_t, const std::vector<cplx>& s) {
                const double drift = std::abs(vec_trace(s, d) - 1.0);
                res.max_trace_drift = std::max(res.max_trace_drift, drift);
                if (drift > kTraceTolerance)
                  throw IntegrationError("evolve_noisy_lindblad: trace drift exceeds tolerance");
                for (std::size_t o = 0; o < options.observables.size(); ++o)
                  res.observables[o].values.push_back(expectation(s, options.observables[o].op));
                const ComplexMatrix m = unvectorize(s, d);
                res.min_eigenvalue = std::min(res.min_eigenvalue, min_eigenvalue(m));
                if (options.keep_states)
                  res.states.push_back(
                      DensityMatrix::from_numerical(m, kTraceTolerance, kPositivityFloor));
              });
  return res;
}

ComplexMatrix noisy_propagator(const LindbladSpec& spec, const noise::NoiseTrajectory& traj,
                               double duration) {
  spec.validate();
  const std::size_t n_steps = steps_for(duration, traj.dt, "noisy_propagator");
  if (n_steps > traj.samples.size())
    throw std::invalid_argument("noisy_propagator: trajectory shorter than duration");
  const std::size_t d = spec.dim();
  StepExponentiator expm(spec.hamiltonian, spec.noise_operator);
  ComplexMatrix u(d, d);
  ComplexMatrix total = ComplexMatrix::identity(d);
  for (std::size_t k = 0; k < n_steps; ++k) {
    expm.fill(traj.samples[k], traj.dt, u);
    total = u * total;
  }
  return total;
}

std::uint64_t trajectory_stream(std::uint64_t stream_tag, std::size_t index) {
  return (stream_tag << 40) ^ static_cast<std::uint64_t>(index);
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::size_t first_error_index = n;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (i < first_error_index) {
          first_error_index = i;
          first_error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

EnsembleResult ensemble_relaxation(const LindbladSpec& spec, const noise::NoiseSpectrum& noise_spec,
                                   const DensityMatrix& rho0, double duration,
                                   const EnsembleOptions& options) {
  spec.validate();
  const std::size_t d = spec.dim();
  if (rho0.dim() != d) throw DimensionError("ensemble_relaxation: state dimension mismatch");
  if (options.n_traj < 2) throw std::invalid_argument("ensemble_relaxation: need n_traj >= 2");
  check_observables(options.observables, d);
  const double dt = options.dt;
  const std::size_t n_hold = steps_for(duration, dt, "ensemble_relaxation");
  const std::size_t n_idle = steps_for(options.idle_before, dt, "ensemble_relaxation idle");
  if (dt > noise_step_limit(spec.hamiltonian) * (1.0 + kGridTol))
    throw std::invalid_argument("ensemble_relaxation: dt too coarse for the Hamiltonian");
  const auto steps = record_steps(options.record_times, n_hold, dt, "ensemble_relaxation");
  const std::size_t n_rec = steps.size();
  const std::size_t n_obs = options.observables.size();
  const double total = dt * static_cast<double>(n_idle + n_hold);
  const double synth =
      options.synthesis_duration > 0.0
          ? options.synthesis_duration
          : noise::fft_friendly_duration(
                std::max({kSynthesisSpan * total, noise::minimum_synthesis_duration(noise_spec), dt}),
                dt);
  if (synth < total * (1.0 - kGridTol))
    throw std::invalid_argument("ensemble_relaxation: synthesis duration shorter than the run");

  // Pure path when there is no dissipation and the initial state is pure.
  const bool pure = spec.jumps.empty() && rho0.purity() > 1.0 - 1e-12;
  std::vector<cplx> psi0;
  if (pure) {
    const auto eig = hermitian_eigen(rho0.matrix());
    psi0.resize(d);
    for (std::size_t i = 0; i < d; ++i) psi0[i] = eig.vectors(i, d - 1);
  }
  const ComplexMatrix d_half = pure ? ComplexMatrix() : half_step_dissipator(spec, dt);
  LindbladSpec idle_spec = spec;
  idle_spec.hamiltonian = ComplexMatrix(d, d);

  // obs_store[i][o * n_rec + t]; state_store[i][t] when mean states are kept.
  std::vector<std::vector<double>> obs_store(options.n_traj);
  std::vector<std::vector<ComplexMatrix>> state_store(options.keep_mean_states ? options.n_traj : 0);
  std::vector<double> drift_store(options.n_traj, 0.0);

  auto run_one = [&](std::size_t i) {
    noise::NoiseTrajectory traj =
        noise::synthesize(noise_spec, synth, dt,
                          {options.seed, trajectory_stream(options.stream_tag, options.first_index + i)},
                          n_idle + n_hold);
    if (n_idle > 0 && options.gate_noise)
      std::fill_n(traj.samples.begin(), n_idle, 0.0);
    if (traj.samples.size() < n_idle + n_hold)
      throw std::invalid_argument("ensemble_relaxation: synthesized trajectory too short");
    auto& out = obs_store[i];
    out.assign(n_obs * n_rec, 0.0);
    if (options.keep_mean_states) state_store[i].resize(n_rec);
    double drift = 0.0;
    const std::vector<std::size_t> idle_steps;  // nothing recorded while idle
    if (pure) {
      std::vector<cplx> psi = psi0;
      if (n_idle > 0) run_unitary({idle_spec, traj.samples.data(), n_idle, dt}, psi, idle_steps,
                                  [](std::size_t, const std::vector<cplx>&) {});
      run_unitary({spec, traj.samples.data() + n_idle, n_hold, dt}, psi, steps,
                  [&](std::size_t r, const std::vector<cplx>& s) {
                    double n2 = 0.0;
                    for (const auto& a : s) n2 += std::norm(a);
                    drift = std::max(drift, std::abs(1.0 - n2));
                    for (std::size_t o = 0; o < n_obs; ++o)
                      out[o * n_rec + r] = expectation_pure(s, options.observables[o].op);
                    if (options.keep_mean_states) state_store[i][r] = outer(s);
                  });
    } else {
      std::vector<cplx> rho = vectorize(rho0.matrix());
      if (n_idle > 0) run_density({idle_spec, traj.samples.data(), n_idle, dt}, d_half, rho,
                                  idle_steps, [](std::size_t, const std::vector<cplx>&) {});
      run_density({spec, traj.samples.data() + n_idle, n_hold, dt}, d_half, rho, steps,
                  [&](std::size_t r, const std::vector<cplx>& s) {
                    drift = std::max(drift, std::abs(vec_trace(s, d) - 1.0));
                    for (std::size_t o = 0; o < n_obs; ++o)
                      out[o * n_rec + r] = expectation(s, options.observables[o].op);
                    if (options.keep_mean_states) state_store[i][r] = unvectorize(s, d);
                  });
    }
    if (drift > kTraceTolerance)
      throw IntegrationError("ensemble_relaxation: trace/norm drift exceeds tolerance");
    drift_store[i] = drift;
  };
  parallel_for(options.n_traj, options.threads, run_one);

  EnsembleResult res;
  res.trajectory_count = options.n_traj;
  res.seed = options.seed;
  for (std::size_t k : steps) res.times.push_back(dt * static_cast<double>(k));
  const double n = static_cast<double>(options.n_traj);
  for (std::size_t o = 0; o < n_obs; ++o) {
    std::vector<double> mean(n_rec, 0.0), se(n_rec, 0.0);
    for (std::size_t i = 0; i < options.n_traj; ++i)
      for (std::size_t t = 0; t < n_rec; ++t) mean[t] += obs_store[i][o * n_rec + t];
    for (auto& m : mean) m /= n;
    for (std::size_t i = 0; i < options.n_traj; ++i)
      for (std::size_t t = 0; t < n_rec; ++t) {
        const double dev = obs_store[i][o * n_rec + t] - mean[t];
        se[t] += dev * dev;
      }
    for (auto& s : se) s = std::sqrt(s / (n - 1.0) / n);
    res.mean_observables.push_back({options.observables[o].name, std::move(mean)});
    res.standard_errors.push_back({options.observables[o].name, std::move(se)});
    if (options.keep_per_trajectory) {
      std::vector<std::vector<double>> per(options.n_traj, std::vector<double>(n_rec));
      for (std::size_t i = 0; i < options.n_traj; ++i)
        for (std::size_t t = 0; t < n_rec; ++t) per[i][t] = obs_store[i][o * n_rec + t];
      res.per_trajectory.push_back(std::move(per));
    }
  }
  if (options.keep_mean_states) {
    res.mean_states.assign(n_rec, ComplexMatrix(d, d));
    for (std::size_t i = 0; i < options.n_traj; ++i)
      for (std::size_t t = 0; t < n_rec; ++t) res.mean_states[t] += state_store[i][t];
    for (auto& m : res.mean_states) m *= cplx{1.0 / n, 0.0};
  }
  for (double dr : drift_store) res.max_trace_drift = std::max(res.max_trace_drift, dr);
  return res;
}

void write_series_csv(std::ostream& out, const std::vector<double>& times, const std::string& name,
                      const std::vector<double>& values, const std::vector<double>& stderrs) {
  if (values.size() != times.size() || (!stderrs.empty() && stderrs.size() != times.size()))
    throw std::invalid_argument("write_series_csv: length mismatch");
  out << "t_us," << name << ",stderr\n";
  for (std::size_t k = 0; k < times.size(); ++k) {
    out << io::format_double(times[k]) << ',' << io::format_double(values[k]) << ','
        << io::format_double(stderrs.empty() ? 0.0 : stderrs[k]) << '\n';
  }
}

}  // namespace dressed::dynamics
