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

#include "dressed/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dressed::models {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

ComplexMatrix embed(const ComplexMatrix& block, std::size_t dim) {
  ComplexMatrix out(dim, dim);
  for (std::size_t i = 0; i < block.rows(); ++i)
    for (std::size_t j = 0; j < block.cols(); ++j) out(i, j) = block(i, j);
  return out;
}

ComplexMatrix single_excitation_hamiltonian(const CoupledPair& m) {
  const double half_delta = 0.5 * m.detuning();
  return ComplexMatrix{{half_delta, m.g}, {m.g, -half_delta}};
}

ComplexMatrix single_excitation_noise(const CoupledPair& m) {
  const double s = m.noise_target == NoiseTarget::kQubit0 ? 0.5 : -0.5;
  return ComplexMatrix::diagonal({s, -s});
}

}  // namespace

double LindbladSpec::max_rate() const {
  double r = 0.0;
  for (const auto& j : jumps) r = std::max(r, j.rate);
  return r;
}

void LindbladSpec::validate() const {
  if (!hamiltonian.is_square() || hamiltonian.rows() == 0)
    throw DimensionError("LindbladSpec: Hamiltonian must be square and non-empty");
  if (!hamiltonian.is_hermitian(1e-12))
    throw std::invalid_argument("LindbladSpec: Hamiltonian is not Hermitian");
  const std::size_t d = dim();
  if (noise_operator) {
    if (noise_operator->rows() != d || noise_operator->cols() != d)
      throw DimensionError("LindbladSpec: noise operator dimension mismatch");
    if (!noise_operator->is_hermitian(1e-12))
      throw std::invalid_argument("LindbladSpec: noise operator is not Hermitian");
  }
  for (const auto& j : jumps) {
    if (!(j.rate >= 0.0) || !std::isfinite(j.rate))
      throw std::invalid_argument("LindbladSpec: jump rates must be finite and >= 0");
    if (j.op.rows() != d || j.op.cols() != d)
      throw DimensionError("LindbladSpec: jump operator dimension mismatch");
  }
}

void CoupledPair::validate() const {
  require(g > 0.0, "CoupledPair: g must be > 0");
  require(gamma1_q0 >= 0.0 && gamma1_q1 >= 0.0, "CoupledPair: rates must be >= 0");
}

LindbladSpec build_driven_qubit(const DrivenQubit& model) {
  require(model.rabi >= 0.0, "DrivenQubit: rabi must be >= 0");
  require(model.gamma1 >= 0.0, "DrivenQubit: gamma1 must be >= 0");
  LindbladSpec spec;
  spec.hamiltonian = pauli::X() * cplx{0.5 * model.rabi, 0.0};
  spec.noise_operator = pauli::Z() * cplx{0.5, 0.0};
  if (model.gamma1 > 0.0) spec.jumps.push_back({model.gamma1, ComplexMatrix::basis_op(2, 0, 1)});
  return spec;
}

LindbladSpec build_single_excitation(const CoupledPair& model) {
  model.validate();
  LindbladSpec spec;
  spec.hamiltonian = single_excitation_hamiltonian(model);
  spec.noise_operator = single_excitation_noise(model);
  return spec;
}

LindbladSpec build_single_excitation_with_ground(const CoupledPair& model) {
  model.validate();
  LindbladSpec spec;
  spec.hamiltonian = embed(single_excitation_hamiltonian(model), 3);
  spec.noise_operator = embed(single_excitation_noise(model), 3);
  if (model.gamma1_q0 > 0.0) spec.jumps.push_back({model.gamma1_q0, ComplexMatrix::basis_op(3, 2, 0)});
  if (model.gamma1_q1 > 0.0) spec.jumps.push_back({model.gamma1_q1, ComplexMatrix::basis_op(3, 2, 1)});
  return spec;
}

LindbladSpec build_dressed_triad(const CoupledPair& model, double gamma_g) {
  model.validate();
  require(gamma_g >= 0.0, "build_dressed_triad: gamma_g must be >= 0");
  LindbladSpec spec;
  spec.hamiltonian = embed(dressed_basis_change(single_excitation_hamiltonian(model)), 3);
  spec.noise_operator = embed(dressed_basis_change(single_excitation_noise(model)), 3);
  // |10> = (|1~> + |0~>)/sqrt2 and |01> = (|1~> - |0~>)/sqrt2.
  const double r = 1.0 / std::sqrt(2.0);
  ComplexMatrix a0(3, 3), a1(3, 3);
  a0(2, 0) = r;
  a0(2, 1) = r;
  a1(2, 0) = r;
  a1(2, 1) = -r;
  if (model.gamma1_q0 > 0.0) spec.jumps.push_back({model.gamma1_q0, a0});
  if (model.gamma1_q1 > 0.0) spec.jumps.push_back({model.gamma1_q1, a1});
  if (gamma_g > 0.0) {
    spec.jumps.push_back({0.5 * gamma_g, ComplexMatrix::basis_op(3, 0, 1)});
    spec.jumps.push_back({0.5 * gamma_g, ComplexMatrix::basis_op(3, 1, 0)});
  }
  return spec;
}

double gamma_g_analytic(const noise::NoiseSpectrum& spec, double g) {
  require(g > 0.0, "gamma_g_analytic: g must be > 0");
  return 0.5 * spec(2.0 * g);
}

double gamma_1rho_analytic(double gamma1, const noise::NoiseSpectrum& spec, double omega_rabi) {
  require(omega_rabi > 0.0, "gamma_1rho_analytic: omega_rabi must be > 0");
  require(gamma1 >= 0.0, "gamma_1rho_analytic: gamma1 must be >= 0");
  return 0.5 * gamma1 + 0.5 * spec(omega_rabi);
}

double gamma_1g_analytic(double gamma1_q0, double gamma1_q1, double gamma_g) {
  return 0.5 * (gamma1_q0 + gamma1_q1) + gamma_g;
}

std::pair<double, double> detailed_balance_rates(double j_at_split, double n_th) {
  require(j_at_split >= 0.0 && n_th >= 0.0, "detailed_balance_rates: inputs must be >= 0");
  const double base = kTwoPi * j_at_split;
  return {base * n_th, base * (n_th + 1.0)};
}

}  // namespace dressed::models
