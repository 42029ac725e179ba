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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "dressed/dynamics.hpp"
#include "test_util.hpp"

using namespace dressed;
using namespace dressed::gate_error;
namespace dt_ = dressed::testing;

namespace {

ComplexMatrix apply(const ComplexMatrix& superop, const ComplexMatrix& rho) {
  return unvectorize(matvec(superop, vectorize(rho)), rho.rows());
}

// exp(M) of a generic superoperator through Eigen.
ComplexMatrix oracle_expm(const ComplexMatrix& m) {
  const Eigen::MatrixXcd e = dt_::to_eigen(m);
  return dt_::from_eigen(e.exp());
}

XebOptions quick_xeb(std::uint64_t seed) {
  XebOptions o;
  o.depths = {1, 2, 4, 8, 16};
  o.circuit_count = 20;
  o.seed = seed;
  return o;
}

}  // namespace

TEST(Fsim, MatrixEntries) {
  const double th = 0.7, ph = 1.1;
  const auto u = fsim_matrix(th, ph);
  const cplx i{0.0, 1.0};
  const ComplexMatrix want{{1, 0, 0, 0},
                           {0, std::cos(th), -i * std::sin(th), 0},
                           {0, -i * std::sin(th), std::cos(th), 0},
                           {0, 0, 0, std::exp(-i * ph)}};
  EXPECT_LT(max_abs_diff(u, want), 1e-15);
  EXPECT_TRUE(u.is_unitary(1e-14));
  EXPECT_LT(max_abs_diff(fsim_matrix(0.0, 0.0), ComplexMatrix::identity(4)), 1e-15);
  EXPECT_NEAR(std::abs(fsim_matrix(kPi / 2.0, 0.0)(1, 2)), 1.0, 1e-15);
}

TEST(Fsim, HamiltonianGeneratesUnitary) {
  for (const FsimGate& gate : {fsim_from_evolution(kTwoPi * 7.5, 0.048),
                               FsimGate{1.3, 0.4, 0.05, 0.0},
                               fsim_from_evolution(kTwoPi * 7.5, 0.048, kTwoPi * 3.0)}) {
    const auto h = gate_hamiltonian(gate);
    EXPECT_TRUE(h.is_hermitian());
    EXPECT_LT(max_abs_diff(dt_::oracle_expm_h(h, gate.tau), gate.unitary()), 1e-12);
  }
}

TEST(Fsim, ResonantEvolutionIsFsim) {
  const double g = kTwoPi * 7.5, tau = 0.03;
  const auto gate = fsim_from_evolution(g, tau);
  EXPECT_DOUBLE_EQ(gate.theta, g * tau);
  EXPECT_EQ(gate.phi, 0.0);
  EXPECT_LT(max_abs_diff(gate.unitary(), fsim_matrix(g * tau, 0.0)), 1e-14);
  // Detuned exchange is not of fSim form.
  const auto detuned = fsim_from_evolution(g, tau, kTwoPi * 5.0);
  EXPECT_GT(max_abs_diff(detuned.unitary(), fsim_matrix(g * tau, 0.0)), 1e-3);
  EXPECT_TRUE(detuned.unitary().is_unitary(1e-12));
}

TEST(Fsim, ValidationAndIdentityAtZeroTime) {
  EXPECT_THROW((FsimGate{1.0, 0.0, 0.0, 0.0}.validate()), std::invalid_argument);
  EXPECT_THROW((FsimGate{NAN, 0.0, 0.1, 0.0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((FsimGate{1.0, 0.0, 0.1, 0.0}.validate()));
  const auto id = fsim_from_evolution(kTwoPi * 7.5, 0.0);
  EXPECT_EQ(id.theta, 0.0);
  EXPECT_LT(max_abs_diff(fsim_matrix(id.theta, id.phi), ComplexMatrix::identity(4)), 1e-15);
}

TEST(DressedOperators, FlipsAndNoiseOperator) {
  const double r = 1.0 / std::sqrt(2.0);
  // |1~> = (|10> + |01>)/sqrt2, |0~> = (|10> - |01>)/sqrt2; |01> is index 1, |10> index 2.
  std::vector<cplx> one(4, 0.0), zero(4, 0.0);
  one[2] = r;
  one[1] = r;
  zero[2] = r;
  zero[1] = -r;
  const auto up = dressed_raising();
  const auto v = matvec(up, zero);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(std::abs(v[k] - one[k]), 0.0, 1e-15);
  EXPECT_LT(max_abs_diff(dressed_lowering(), up.adjoint()), 1e-15);
  const auto n = gate_noise_operator();
  EXPECT_TRUE(n.is_hermitian());
  EXPECT_NEAR(n.trace().real(), 0.0, 1e-15);
  EXPECT_NEAR(n(2, 2).real(), 0.5, 1e-15);
  EXPECT_NEAR(n(1, 1).real(), -0.5, 1e-15);
}

TEST(FirstOrder, LinearFormulas) {
  const auto e = first_order_errors(0.1, 0.048);
  EXPECT_NEAR(e.eps_avg, 0.1 * 0.048 / 5.0, 1e-16);
  EXPECT_NEAR(e.eps_pauli, 0.1 * 0.048 / 4.0, 1e-16);
  EXPECT_FALSE(e.beyond_weak_noise);
  EXPECT_TRUE(first_order_errors(10.0, 0.05).beyond_weak_noise);
  EXPECT_NEAR(pauli_from_average(0.2, 4), 0.25, 1e-15);
  EXPECT_NEAR(pauli_from_average(1.0, 2), 1.5, 1e-15);
}

TEST(Channel, UnitarySuperopActsByConjugation) {
  std::mt19937_64 rng(4);
  const auto u = dt_::random_unitary(4, rng);
  const auto rho = dt_::random_density(4, rng);
  EXPECT_LT(max_abs_diff(apply(unitary_superop(u), rho), u * rho * u.adjoint()), 1e-13);
  const auto c = compare_channel(unitary_superop(u), u);
  EXPECT_NEAR(c.process_fidelity, 1.0, 1e-13);
  EXPECT_NEAR(c.eps_avg, 0.0, 1e-13);
}

TEST(Channel, DepolarizingOracle) {
  std::mt19937_64 rng(5);
  const auto u = dt_::random_unitary(4, rng);
  const double p = 0.93;
  const auto s = depolarizing_channel(u, p);
  const auto rho = dt_::random_density(4, rng);
  const ComplexMatrix want =
      p * (u * rho * u.adjoint()) + ComplexMatrix::identity(4) * cplx{(1.0 - p) / 4.0, 0.0};
  EXPECT_LT(max_abs_diff(apply(s, rho), want), 1e-13);
  // F_pro = p + (1 - p)/d^2, eps_avg = (1 - p)(d - 1)/d, eps_pauli = (1 - p)(1 - 1/d^2).
  const auto c = compare_channel(s, u);
  EXPECT_NEAR(c.process_fidelity, p + (1.0 - p) / 16.0, 1e-13);
  EXPECT_NEAR(c.eps_avg, (1.0 - p) * 0.75, 1e-13);
  EXPECT_NEAR(c.eps_pauli, (1.0 - p) * 15.0 / 16.0, 1e-13);
  EXPECT_NEAR(c.eps_pauli / c.eps_avg, 1.25, 1e-12);
}

TEST(Channel, LindbladChannelMatchesGeneratorExponential) {
  const auto gate = fsim_from_evolution(kTwoPi * 7.5, 0.048);
  const auto spec = gate_lindblad_spec(gate, 0.4);
  const auto got = lindblad_channel(spec, gate.tau);
  const auto l = dynamics::lindblad_superop(spec) * cplx{gate.tau, 0.0};
  EXPECT_LT(max_abs_diff(got, oracle_expm(l)), 1e-12);
  // Trace preserving and positive on a random input.
  std::mt19937_64 rng(6);
  const auto out = apply(got, dt_::random_density(4, rng));
  EXPECT_NEAR(out.trace().real(), 1.0, 1e-12);
  EXPECT_NO_THROW(DensityMatrix::from_numerical(out, 1e-12, -1e-12));
}

TEST(Channel, ExactErrorsMatchFirstOrderAcrossGates) {
  const double gamma = 0.1;
  for (const FsimGate& gate : {fsim_from_evolution(kTwoPi * 7.5, 0.048),
                               fsim_from_evolution(kTwoPi * 7.5, 0.2),
                               FsimGate{0.4, 1.0, 0.03, 0.0}, FsimGate{kPi / 2.0, kPi / 6.0, 0.1, 0.0}}) {
    const auto rep = channel_errors(gate, gamma);
    const double x = gamma * gate.tau;
    EXPECT_NEAR(rep.eps_avg_channel, x / 5.0, x * x) << gate.theta;
    EXPECT_NEAR(rep.eps_pauli_channel / rep.eps_avg_channel, 1.25, 1e-3);
    EXPECT_NEAR(rep.eps_avg_analytic, x / 5.0, 1e-15);
    EXPECT_NEAR(rep.eps_pauli_analytic, x / 4.0, 1e-15);
    EXPECT_DOUBLE_EQ(rep.gamma_g_used, gamma);
  }
}

TEST(Channel, ErrorIndependentOfGateUnitary) {
  // At first order the average error depends on gamma and tau alone.
  const double gamma = 0.05, tau = 0.06;
  double lo = 1.0, hi = 0.0;
  for (double th : {0.0, 0.3, 1.2, kPi / 2.0, 2.9}) {
    for (double ph : {0.0, 0.8, kPi}) {
      const double e = channel_errors(FsimGate{th, ph, tau, 0.0}, gamma).eps_avg_channel;
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
  }
  EXPECT_LT(hi - lo, (gamma * tau) * (gamma * tau));
}

TEST(Channel, NoNoiseIsExact) {
  const auto rep = channel_errors(fsim_from_evolution(kTwoPi * 7.5, 0.048), 0.0);
  EXPECT_NEAR(rep.eps_avg_channel, 0.0, 1e-13);
  EXPECT_NEAR(rep.process_fidelity, 1.0, 1e-13);
}

TEST(GateChannel, KindsAgreeWithDirectConstructions) {
  const auto gate = fsim_from_evolution(kTwoPi * 7.5, 0.048);
  const auto u = gate.unitary();
  EXPECT_LT(max_abs_diff(gate_channel(gate, GateNoise::none(), 1), unitary_superop(u)), 1e-14);
  EXPECT_LT(max_abs_diff(gate_channel(gate, GateNoise::lindblad(0.3), 1),
                         lindblad_channel(gate_lindblad_spec(gate, 0.3), gate.tau)),
            1e-14);
  const auto quiet = noise::NoiseSpectrum::flat_band(kTwoPi * 5.0, kTwoPi * 20.0, 0.0);
  EXPECT_LT(max_abs_diff(gate_channel(gate, GateNoise::stochastic(quiet, 20, 0.001), 1),
                         unitary_superop(u)),
            1e-12);
}

TEST(GateChannel, StochasticChannelIsTracePreservingAndReproducible) {
  const auto gate = fsim_from_evolution(kTwoPi * 7.5, 0.048);
  const auto band = noise::NoiseSpectrum::flat_band(kTwoPi * 5.0, kTwoPi * 20.0, 20.0);
  const auto noise = GateNoise::stochastic(band, 50, 0.001);
  const auto a = gate_channel(gate, noise, 9, 1);
  const auto b = gate_channel(gate, noise, 9, 3);
  EXPECT_EQ(max_abs_diff(a, b), 0.0);
  std::mt19937_64 rng(10);
  const auto out = apply(a, dt_::random_density(4, rng));
  EXPECT_NEAR(out.trace().real(), 1.0, 1e-12);
  EXPECT_NO_THROW(DensityMatrix::from_numerical(out, 1e-12, -1e-10));
  EXPECT_GT(max_abs_diff(a, gate_channel(gate, noise, 10, 1)), 0.0);
}

TEST(Xeb, DepolarizingDecayRecoveredExactly) {
  // Under a depolarizing gate channel each circuit's linear XEB equals p^m.
  const auto u = fsim_matrix(kPi / 2.0, kPi / 6.0);
  const double p = 0.97;
  const auto r = run_xeb(u, depolarizing_channel(u, p), quick_xeb(3));
  ASSERT_TRUE(r.converged);
  for (std::size_t k = 0; k < r.depths.size(); ++k)
    EXPECT_NEAR(r.fidelities[k], std::pow(p, static_cast<double>(r.depths[k])), 1e-10);
  EXPECT_NEAR(r.decay, p, 1e-9);
  EXPECT_NEAR(r.per_cycle_pauli_error, (1.0 - p) * 15.0 / 16.0, 1e-9);
}

TEST(Xeb, IdealChannelHasNoError) {
  const auto u = fsim_matrix(0.9, 0.0);
  const auto r = run_xeb(u, unitary_superop(u), quick_xeb(4));
  ASSERT_TRUE(r.converged);
  for (double f : r.fidelities) EXPECT_NEAR(f, 1.0, 1e-10);
  EXPECT_NEAR(r.per_cycle_pauli_error, 0.0, 1e-9);
}

TEST(Xeb, LindbladDeltaTracksChannelPauliError) {
  const auto gate = fsim_from_evolution(kTwoPi * 7.5, 0.048);
  const double gamma = 1.0;
  auto o = quick_xeb(5);
  o.circuit_count = 40;
  const auto d = xeb_delta(gate, GateNoise::lindblad(gamma), o);
  const double want = channel_errors(gate, gamma).eps_pauli_channel;
  EXPECT_NEAR(d.delta_eps / want, 1.0, 0.15);
  EXPECT_GT(d.delta_stderr, 0.0);
  EXPECT_LE(std::abs(d.delta_eps - want), 4.0 * d.delta_stderr + 0.02 * want);
}

TEST(Xeb, ReproducibleAndValidated) {
  const auto u = fsim_matrix(0.5, 0.2);
  const auto s = depolarizing_channel(u, 0.95);
  const auto a = run_xeb(u, s, quick_xeb(8));
  const auto b = run_xeb(u, s, quick_xeb(8));
  EXPECT_EQ(a.fidelities, b.fidelities);
  EXPECT_EQ(a.loo_pauli_errors.size(), a.circuit_count);
  auto few = quick_xeb(1);
  few.circuit_count = 19;
  EXPECT_THROW(run_xeb(u, s, few), std::invalid_argument);
  auto shallow = quick_xeb(1);
  shallow.depths = {1, 2};
  EXPECT_THROW(run_xeb(u, s, shallow), std::invalid_argument);
}

TEST(Xeb, ShotSamplingIsUnbiased) {
  const auto u = fsim_matrix(kPi / 2.0, 0.0);
  const double p = 0.9;
  auto o = quick_xeb(12);
  o.shots = 2000;
  const auto r = run_xeb(u, depolarizing_channel(u, p), o);
  ASSERT_TRUE(r.converged);
  EXPECT_LE(std::abs(r.per_cycle_pauli_error - 0.1 * 15.0 / 16.0),
            4.0 * r.per_cycle_pauli_stderr + 1e-3);
}

TEST(Sweeps, PowerSweepIsLinearThroughOrigin) {
  ScanBase base(noise::NoiseSpectrum::flat_band(kTwoPi * 5.0, kTwoPi * 20.0, 0.2));
  base.g = kTwoPi * 7.5;
  base.tau = 0.1;
  base.xeb = quick_xeb(2);
  const auto t = power_sweep(base, {1.0, 5.0, 10.0, 20.0});
  ASSERT_EQ(t.points.size(), 4u);
  ASSERT_TRUE(t.fit.has_value());
  EXPECT_GT(t.fit->r_squared, 0.99);
  EXPECT_LE(std::abs(t.fit->intercept), 2.0 * t.fit->intercept_stderr + 1e-6);
  for (const auto& p : t.points) EXPECT_NEAR(p.analytic, p.gamma_g * base.tau / 4.0, 1e-15);
  EXPECT_THROW(power_sweep(base, {1.0, 2.0, 3.0}), std::invalid_argument);
  EXPECT_THROW(power_sweep(base, {0.0, 1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST(Sweeps, GSweepReportsSwapFrequency) {
  ScanBase base(noise::NoiseSpectrum::flat_band(kTwoPi * 5.0, kTwoPi * 20.0, 2.0));
  base.tau = 0.1;
  base.xeb = quick_xeb(2);
  const auto t = g_sweep(base, {kTwoPi * 2.5, kTwoPi * 5.0, kTwoPi * 7.5, kTwoPi * 15.0});
  ASSERT_EQ(t.points.size(), 4u);
  EXPECT_NEAR(t.points[0].value, 5.0, 1e-12);
  EXPECT_NEAR(t.points[3].value, 30.0, 1e-12);
  // 30 MHz splitting sits outside the band: no analytic rate.
  EXPECT_NEAR(t.points[3].gamma_g, 0.0, 1e-15);
  EXPECT_GT(t.points[2].gamma_g, 0.0);
}

TEST(Sweeps, CsvHeader) {
  DeltaEpsTable t;
  t.variable = "tau_us";
  t.points.push_back({0.05, 0.1, 0.0, 0.00125, 1e-4, 0.00125});
  std::ostringstream os;
  write_delta_eps_csv(os, t);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')),
            "tau_us,gamma_g_per_us,gamma_g_stderr_per_us,delta_eps,stderr,analytic");
}
