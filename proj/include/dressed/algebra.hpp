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

// Dense complex linear algebra for Hilbert spaces of dimension <= 16.
//
// Basis conventions used throughout the library:
//   two-qubit computational basis  (|00>, |01>, |10>, |11>)
//   single-excitation basis        (|10>, |01>)
//   dressed basis                  (|1~>, |0~>) with |1~> = (|10>+|01>)/sqrt2,
//                                                    |0~> = (|10>-|01>)/sqrt2
//   dressed triad basis            (|1~>, |0~>, |00>)

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dressed {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Row-major dense complex matrix.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries);
  ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix diagonal(std::span<const cplx> diag);
  static ComplexMatrix diagonal(std::initializer_list<cplx> diag);
  /// |i><j| in an n-dimensional space.
  static ComplexMatrix basis_op(std::size_t n, std::size_t i, std::size_t j);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<cplx> entries() { return data_; }
  std::span<const cplx> entries() const { return data_; }

  ComplexMatrix adjoint() const;
  ComplexMatrix transpose() const;
  ComplexMatrix conjugate() const;
  cplx trace() const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(cplx s);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, cplx s) { return a *= s; }
  friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

  bool is_hermitian(double tol = 1e-12) const;
  bool is_unitary(double tol = 1e-10) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

/// max_ij |a_ij - b_ij|; throws on shape mismatch.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

/// Normalized pure state.
class StateVector {
 public:
  explicit StateVector(std::vector<cplx> amplitudes);
  StateVector(std::initializer_list<cplx> amplitudes)
      : StateVector(std::vector<cplx>(amplitudes)) {}
  /// Computational basis state |index> in dimension dim.
  static StateVector basis(std::size_t dim, std::size_t index);

  std::size_t dim() const { return amps_.size(); }
  std::span<const cplx> amplitudes() const { return amps_; }
  const cplx& operator[](std::size_t i) const { return amps_[i]; }
  double norm() const;

 private:
  std::vector<cplx> amps_;
};

/// Validated density matrix: Hermitian, unit trace, positive semidefinite.
class DensityMatrix {
 public:
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kTraceTol = 1e-10;
  static constexpr double kEigenFloor = -1e-9;

  explicit DensityMatrix(ComplexMatrix m);
  /// For states produced by numerical integration: takes the Hermitian part
  /// and applies the given trace and eigenvalue tolerances.
  static DensityMatrix from_numerical(const ComplexMatrix& m, double trace_tol,
                                      double eigen_floor);
  static DensityMatrix from_pure(const StateVector& psi);

  std::size_t dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  double population(std::size_t i) const { return m_(i, i).real(); }
  double expectation(const ComplexMatrix& observable) const;
  double purity() const;

 private:
  struct Unchecked {};
  DensityMatrix(ComplexMatrix m, Unchecked) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
std::vector<cplx> matvec(const ComplexMatrix& m, std::span<const cplx> v);

/// Ascending eigenvalues and column eigenvectors of a Hermitian matrix.
struct HermitianEigen {
  std::vector<double> values;
  ComplexMatrix vectors;
};
HermitianEigen hermitian_eigen(const ComplexMatrix& h);
double min_eigenvalue(const ComplexMatrix& h);
/// Largest |eigenvalue| of a Hermitian matrix.
double spectral_radius(const ComplexMatrix& h);

/// exp(-i * scale * h) for Hermitian h. Throws std::invalid_argument when h
/// deviates from Hermitian by more than 1e-9.
ComplexMatrix hermitian_expm(const ComplexMatrix& h, double scale);

/// exp(a) for a general square matrix (scaling and squaring with Taylor).
ComplexMatrix general_expm(const ComplexMatrix& a);

namespace pauli {
ComplexMatrix I();
ComplexMatrix X();
ComplexMatrix Y();
ComplexMatrix Z();
}  // namespace pauli

/// The 4^n - 1 non-identity Pauli strings, n in {1, 2}. Ordering is
/// lexicographic over (I, X, Y, Z) with the first factor most significant.
std::vector<ComplexMatrix> pauli_strings(std::size_t n_qubits);

/// Orthogonal matrix whose columns are |1~>, |0~> expressed in (|10>, |01>).
ComplexMatrix dressed_transform();
/// Conjugates a 2x2 operator from the single-excitation basis (|10>, |01>)
/// into the dressed basis (|1~>, |0~>). Involutive.
ComplexMatrix dressed_basis_change(const ComplexMatrix& op);

// Row-major vectorization helpers: vec(rho)[i*d + j] = rho(i, j).
std::vector<cplx> vectorize(const ComplexMatrix& m);
ComplexMatrix unvectorize(std::span<const cplx> v, std::size_t dim);
/// Superoperator of rho -> a * rho * b under row-major vectorization.
ComplexMatrix sandwich_superop(const ComplexMatrix& a, const ComplexMatrix& b);
/// Superoperator of rho -> u rho u^dagger.
ComplexMatrix unitary_superop(const ComplexMatrix& u);

}  // namespace dressed
