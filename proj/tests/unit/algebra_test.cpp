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

#include "dressed/algebra.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"

using namespace dressed;
using dressed::testing::oracle_expm_h;
using dressed::testing::random_density;
using dressed::testing::random_hermitian;
using dressed::testing::random_matrix;

namespace {

const cplx kI{0.0, 1.0};

}  // namespace

TEST(ComplexMatrix, RejectsWrongEntryCount) {
  EXPECT_THROW(ComplexMatrix(2, 2, std::vector<cplx>(3)), DimensionError);
  EXPECT_THROW((ComplexMatrix{{1.0, 2.0}, {3.0}}), DimensionError);
}

TEST(ComplexMatrix, HermitianAndUnitaryChecks) {
  EXPECT_TRUE(pauli::Y().is_hermitian());
  ComplexMatrix h = pauli::X();
  h(0, 1) += 1e-11;
  EXPECT_FALSE(h.is_hermitian());
  EXPECT_TRUE(pauli::Z().is_unitary());
  EXPECT_FALSE((pauli::Z() * cplx{1.0 + 1e-9, 0.0}).is_unitary());
}

TEST(Kron, IdentityAndPauliStrings) {
  EXPECT_EQ(max_abs_diff(kron(pauli::I(), pauli::I()), ComplexMatrix::identity(4)), 0.0);
  const ComplexMatrix xi = kron(pauli::X(), pauli::I());
  ComplexMatrix expect(4, 4);
  expect(0, 2) = expect(1, 3) = expect(2, 0) = expect(3, 1) = 1.0;
  EXPECT_EQ(max_abs_diff(xi, expect), 0.0);
  EXPECT_EQ(max_abs_diff(kron(pauli::Z(), pauli::Z()), ComplexMatrix::diagonal({1.0, -1.0, -1.0, 1.0})), 0.0);
}

TEST(Kron, Associative) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 5; ++k) {
    const auto a = random_matrix(2, rng), b = random_matrix(2, rng), c = random_matrix(2, rng);
    EXPECT_LT(max_abs_diff(kron(kron(a, b), c), kron(a, kron(b, c))), 1e-12);
  }
}

TEST(HermitianExpm, ClosedForms) {
  EXPECT_LT(max_abs_diff(hermitian_expm(pauli::X(), kPi), ComplexMatrix::identity(2) * cplx{-1.0, 0.0}), 1e-12);
  EXPECT_LT(max_abs_diff(hermitian_expm(pauli::Z(), kPi / 2), ComplexMatrix::diagonal({-kI, kI})), 1e-12);
  std::mt19937_64 rng(3);
  EXPECT_LT(max_abs_diff(hermitian_expm(random_hermitian(4, rng), 0.0), ComplexMatrix::identity(4)), 1e-14);
}

TEST(HermitianExpm, MatchesPadeOracle) {
  std::mt19937_64 rng(5);
  for (std::size_t n : {2u, 3u, 4u}) {
    const auto h = random_hermitian(n, rng);
    const auto u = hermitian_expm(h, 0.7);
    EXPECT_LT(max_abs_diff(u, oracle_expm_h(h, 0.7)), 1e-11);
    EXPECT_TRUE(u.is_unitary(1e-10));
  }
}

TEST(HermitianExpm, GroupProperty) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ud(-10.0, 10.0);
  for (int k = 0; k < 10; ++k) {
    const auto h = random_hermitian(4, rng);
    const double a = ud(rng), b = ud(rng);
    EXPECT_LT(max_abs_diff(hermitian_expm(h, a) * hermitian_expm(h, b), hermitian_expm(h, a + b)), 1e-10);
  }
}

TEST(HermitianExpm, RejectsNonHermitian) {
  ComplexMatrix h = pauli::X();
  h(0, 1) += 1e-6;
  EXPECT_THROW(hermitian_expm(h, 1.0), std::invalid_argument);
}

TEST(GeneralExpm, MatchesPadeOracle) {
  std::mt19937_64 rng(23);
  const auto a = random_matrix(9, rng) * cplx{0.8, 0.0};
  const ComplexMatrix e = general_expm(a);
  const Eigen::MatrixXcd o = dressed::testing::to_eigen(a).exp();
  EXPECT_LT(max_abs_diff(e, dressed::testing::from_eigen(o)), 1e-10);
}

TEST(PauliStrings, CountsTracesOrthogonality) {
  EXPECT_EQ(pauli_strings(1).size(), 3u);
  const auto p2 = pauli_strings(2);
  ASSERT_EQ(p2.size(), 15u);
  for (std::size_t i = 0; i < p2.size(); ++i) {
    EXPECT_EQ(p2[i].trace(), cplx(0.0, 0.0));
    for (std::size_t j = 0; j < p2.size(); ++j) {
      const cplx t = (p2[i] * p2[j]).trace();
      EXPECT_LT(std::abs(t - cplx{i == j ? 4.0 : 0.0, 0.0}), 1e-14);
    }
  }
  EXPECT_THROW(pauli_strings(3), std::invalid_argument);
}

TEST(PauliStrings, SwapIdentity) {
  std::mt19937_64 rng(29);
  for (std::size_t nq : {1u, 2u}) {
    const std::size_t d = nq == 1 ? 2 : 4;
    auto ps = pauli_strings(nq);
    ps.push_back(ComplexMatrix::identity(d));
    const auto a = random_matrix(d, rng), b = random_matrix(d, rng);
    cplx sum{0.0, 0.0};
    for (const auto& p : ps) sum += (a * p * b * p).trace();
    EXPECT_LT(std::abs(sum - static_cast<double>(d) * a.trace() * b.trace()), 1e-10);
  }
}

TEST(DressedBasis, CentralRotations) {
  const auto detuning = ComplexMatrix::diagonal({0.5, -0.5});
  EXPECT_LT(max_abs_diff(dressed_basis_change(detuning), pauli::X() * cplx{0.5, 0.0}), 1e-15);
  EXPECT_LT(max_abs_diff(dressed_basis_change(pauli::X()), pauli::Z()), 1e-15);
  EXPECT_LT(max_abs_diff(dressed_basis_change(ComplexMatrix::identity(2)), ComplexMatrix::identity(2)), 1e-15);
  EXPECT_THROW(dressed_basis_change(ComplexMatrix::identity(3)), DimensionError);
}

TEST(DressedBasis, InvolutiveAndSpectrumPreserving) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 5; ++k) {
    const auto h = random_hermitian(2, rng);
    const auto hd = dressed_basis_change(h);
    EXPECT_LT(max_abs_diff(dressed_basis_change(hd), h), 1e-14);
    const auto e1 = hermitian_eigen(h).values, e2 = hermitian_eigen(hd).values;
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(e1[i], e2[i], 1e-12);
  }
}

TEST(StateVector, Normalizes) {
  const StateVector v({3.0, cplx{0.0, 4.0}});
  EXPECT_NEAR(v.norm(), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(v[1]), 0.8, 1e-15);
  EXPECT_THROW(StateVector(std::vector<cplx>{0.0, 0.0}), std::invalid_argument);
}

TEST(DensityMatrix, Validation) {
  std::mt19937_64 rng(37);
  EXPECT_NO_THROW(DensityMatrix(random_density(3, rng)));
  EXPECT_THROW(DensityMatrix(ComplexMatrix::diagonal({0.6, 0.6})), std::invalid_argument);
  EXPECT_THROW(DensityMatrix(ComplexMatrix::diagonal({1.1, -0.1})), std::invalid_argument);
  ComplexMatrix nh = ComplexMatrix::diagonal({0.5, 0.5});
  nh(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix{nh}, std::invalid_argument);
  const auto pure = DensityMatrix::from_pure(StateVector({1.0, 1.0}));
  EXPECT_NEAR(pure.purity(), 1.0, 1e-14);
  EXPECT_NEAR(pure.expectation(pauli::X()), 1.0, 1e-14);
}

TEST(Superoperators, RowMajorConvention) {
  std::mt19937_64 rng(41);
  const auto a = random_matrix(3, rng), b = random_matrix(3, rng), rho = random_matrix(3, rng);
  const auto direct = a * rho * b;
  const auto via = unvectorize(matvec(sandwich_superop(a, b), vectorize(rho)), 3);
  EXPECT_LT(max_abs_diff(direct, via), 1e-12);
  const auto u = dressed::testing::random_unitary(3, rng);
  EXPECT_LT(max_abs_diff(unitary_superop(u), sandwich_superop(u, u.adjoint())), 1e-14);
}
