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

// Physical systems as Hamiltonian + dissipator specifications, and the
// closed-form rates they obey.
//
// A time-dependent Hamiltonian is represented as H(t) = H0 + d(t) * N with a
// fixed noise operator N and a scalar detuning trajectory d(t) (rad/us).

#include <optional>
#include <utility>
#include <vector>

#include "dressed/algebra.hpp"
#include "dressed/noise.hpp"

namespace dressed::models {

struct JumpTerm {
  double rate;       // 1/us
  ComplexMatrix op;  // enters the dissipator as rate * D[op]
};

struct LindbladSpec {
  ComplexMatrix hamiltonian;                  // H0, rad/us
  std::optional<ComplexMatrix> noise_operator;  // N
  std::vector<JumpTerm> jumps;

  std::size_t dim() const { return hamiltonian.rows(); }
  double max_rate() const;
  /// Throws DimensionError / std::invalid_argument on malformed specs.
  void validate() const;
};

struct DrivenQubit {
  double rabi = 0.0;    // Omega, rad/us
  double gamma1 = 0.0;  // 1/us
};

enum class NoiseTarget { kQubit0, kQubit1 };

struct CoupledPair {
  double omega1 = 0.0;  // qubit 0 frequency in the rotating frame, rad/us
  double omega2 = 0.0;  // qubit 1
  double g = 0.0;       // exchange coupling, rad/us
  double gamma1_q0 = 0.0;
  double gamma1_q1 = 0.0;
  NoiseTarget noise_target = NoiseTarget::kQubit0;

  double detuning() const { return omega1 - omega2; }
  void validate() const;
};

/// Basis (|0>, |1>). H = Omega/2 sigma_x, N = sigma_z/2, jump |0><1| at gamma1.
LindbladSpec build_driven_qubit(const DrivenQubit& model);

/// Basis (|10>, |01>). H = Delta/2 diag(1,-1) + g sigma_x, N = +-diag(1,-1)/2
/// with the sign set by the noise target. No jumps: relaxation leaves the
/// subspace; see build_single_excitation_with_ground.
LindbladSpec build_single_excitation(const CoupledPair& model);

/// Basis (|10>, |01>, |00>): the single-excitation block plus the ground
/// state, with |00><10| at gamma1_q0 and |00><01| at gamma1_q1.
LindbladSpec build_single_excitation_with_ground(const CoupledPair& model);

/// Basis (|1~>, |0~>, |00>): dressed-frame Hamiltonian, bare relaxation
/// operators rewritten in the dressed basis, and dressed flips
/// |1~><0~|, |0~><1~| at gamma_g/2 each.
LindbladSpec build_dressed_triad(const CoupledPair& model, double gamma_g);

/// Gamma_g = S(2g)/2.
double gamma_g_analytic(const noise::NoiseSpectrum& spec, double g);
/// Gamma_1rho = Gamma_1/2 + S(Omega)/2.
double gamma_1rho_analytic(double gamma1, const noise::NoiseSpectrum& spec, double omega_rabi);
/// Gamma_1g = (Gamma_1^(0) + Gamma_1^(1))/2 + Gamma_g.
double gamma_1g_analytic(double gamma1_q0, double gamma1_q1, double gamma_g);

/// (gamma_up, gamma_down) = (2pi J n_th, 2pi J (n_th + 1)).
std::pair<double, double> detailed_balance_rates(double j_at_split, double n_th);

}  // namespace dressed::models
