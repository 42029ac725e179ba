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

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace dressed {

namespace {

using EigenMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

EigenMatrix to_eigen(const ComplexMatrix& m) {
  EigenMatrix e(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) e(r, c) = m(r, c);
  return e;
}

ComplexMatrix from_eigen(const EigenMatrix& e) {
  ComplexMatrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  for (Eigen::Index r = 0; r < e.rows(); ++r)
    for (Eigen::Index c = 0; c < e.cols(); ++c) m(r, c) = e(r, c);
  return m;
}

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError(std::string(what) + ": shape mismatch");
}

void require_square(const ComplexMatrix& a, const char* what) {
  if (!a.is_square()) throw DimensionError(std::string(what) + ": matrix must be square");
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, cplx{0.0, 0.0}) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_)
    throw DimensionError("ComplexMatrix: entry count does not match rows*cols");
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw DimensionError("ComplexMatrix: ragged initializer");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const cplx> diag) {
  ComplexMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::initializer_list<cplx> diag) {
  return diagonal(std::span<const cplx>(diag.begin(), diag.size()));
}

ComplexMatrix ComplexMatrix::basis_op(std::size_t n, std::size_t i, std::size_t j) {
  if (i >= n || j >= n) throw DimensionError("basis_op: index out of range");
  ComplexMatrix m(n, n);
  m(i, j) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

ComplexMatrix ComplexMatrix::transpose() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

ComplexMatrix ComplexMatrix::conjugate() const {
  ComplexMatrix out = *this;
  for (auto& z : out.data_) z = std::conj(z);
  return out;
}

cplx ComplexMatrix::trace() const {
  require_square(*this, "trace");
  cplx t{0.0, 0.0};
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator+");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  require_same_shape(*this, other, "operator-");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
  for (auto& z : data_) z *= s;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("operator*: inner dimensions differ");
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx{0.0, 0.0}) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

bool ComplexMatrix::is_hermitian(double tol) const {
  if (!is_square()) return false;
  return max_abs_diff(*this, adjoint()) < tol;
}

bool ComplexMatrix::is_unitary(double tol) const {
  if (!is_square()) return false;
  return max_abs_diff(adjoint() * (*this), identity(rows_)) < tol;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double worst = 0.0;
  auto ea = a.entries();
  auto eb = b.entries();
  for (std::size_t i = 0; i < ea.size(); ++i) worst = std::max(worst, std::abs(ea[i] - eb[i]));
  return worst;
}

StateVector::StateVector(std::vector<cplx> amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.empty()) throw DimensionError("StateVector: empty amplitude list");
  double n2 = 0.0;
  for (const auto& a : amps_) n2 += std::norm(a);
  if (!(n2 > 0.0) || !std::isfinite(n2))
    throw std::invalid_argument("StateVector: amplitudes must have finite nonzero norm");
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& a : amps_) a *= inv;
}

StateVector StateVector::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw DimensionError("StateVector::basis: index out of range");
  std::vector<cplx> v(dim, cplx{0.0, 0.0});
  v[index] = 1.0;
  return StateVector(std::move(v));
}

double StateVector::norm() const {
  double n2 = 0.0;
  for (const auto& a : amps_) n2 += std::norm(a);
  return std::sqrt(n2);
}

DensityMatrix::DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {
  require_square(m_, "DensityMatrix");
  if (!m_.is_hermitian(kHermitianTol))
    throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
  const cplx tr = m_.trace();
  if (std::abs(tr - cplx{1.0, 0.0}) > kTraceTol)
    throw std::invalid_argument("DensityMatrix: trace differs from 1 by " +
                                std::to_string(std::abs(tr - 1.0)));
  if (min_eigenvalue(m_) < kEigenFloor)
    throw std::invalid_argument("DensityMatrix: matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::from_numerical(const ComplexMatrix& m, double trace_tol,
                                            double eigen_floor) {
  require_square(m, "DensityMatrix");
  ComplexMatrix sym = (m + m.adjoint()) * cplx{0.5, 0.0};
  const cplx tr = sym.trace();
  if (std::abs(tr - cplx{1.0, 0.0}) > trace_tol)
    throw std::invalid_argument("DensityMatrix: trace differs from 1 by " +
                                std::to_string(std::abs(tr - 1.0)));
  if (min_eigenvalue(sym) < eigen_floor)
    throw std::invalid_argument("DensityMatrix: matrix has a negative eigenvalue");
  return DensityMatrix(std::move(sym), Unchecked{});
}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi) {
  const std::size_t d = psi.dim();
  ComplexMatrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) m(i, j) = psi[i] * std::conj(psi[j]);
  return DensityMatrix(std::move(m));
}

double DensityMatrix::expectation(const ComplexMatrix& observable) const {
  require_same_shape(m_, observable, "expectation");
  const std::size_t d = dim();
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) acc += m_(i, j) * observable(j, i);
  return acc.real();
}

double DensityMatrix::purity() const {
  const std::size_t d = dim();
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) acc += std::norm(m_(i, j));
  return acc;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ar = 0; ar < a.rows(); ++ar)
    for (std::size_t ac = 0; ac < a.cols(); ++ac) {
      const cplx s = a(ar, ac);
      for (std::size_t br = 0; br < b.rows(); ++br)
        for (std::size_t bc = 0; bc < b.cols(); ++bc)
          out(ar * b.rows() + br, ac * b.cols() + bc) = s * b(br, bc);
    }
  return out;
}

std::vector<cplx> matvec(const ComplexMatrix& m, std::span<const cplx> v) {
  if (m.cols() != v.size()) throw DimensionError("matvec: dimension mismatch");
  std::vector<cplx> out(m.rows(), cplx{0.0, 0.0});
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m(i, j) * v[j];
  return out;
}

HermitianEigen hermitian_eigen(const ComplexMatrix& h) {
  require_square(h, "hermitian_eigen");
  Eigen::SelfAdjointEigenSolver<EigenMatrix> solver(to_eigen(h));
  if (solver.info() != Eigen::Success) throw std::runtime_error("hermitian_eigen: solver failed");
  HermitianEigen out;
  out.values.assign(solver.eigenvalues().data(),
                    solver.eigenvalues().data() + solver.eigenvalues().size());
  out.vectors = from_eigen(solver.eigenvectors());
  return out;
}

double min_eigenvalue(const ComplexMatrix& h) {
  require_square(h, "min_eigenvalue");
  // Symmetrize so round-off asymmetry does not leak into the solver.
  ComplexMatrix sym = (h + h.adjoint()) * cplx{0.5, 0.0};
  Eigen::SelfAdjointEigenSolver<EigenMatrix> solver(to_eigen(sym), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

double spectral_radius(const ComplexMatrix& h) {
  const auto eig = hermitian_eigen(h);
  return std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
}

ComplexMatrix hermitian_expm(const ComplexMatrix& h, double scale) {
  require_square(h, "hermitian_expm");
  if (max_abs_diff(h, h.adjoint()) > 1e-9)
    throw std::invalid_argument("hermitian_expm: argument is not Hermitian");
  const std::size_t d = h.rows();
  if (d == 2) {
    // h = a I + b.sigma  =>  exp(-i s h) = e^{-i s a} (cos(s|b|) I - i sin(s|b|) b^.sigma)
    const double a = 0.5 * (h(0, 0).real() + h(1, 1).real());
    const double bz = 0.5 * (h(0, 0).real() - h(1, 1).real());
    const double bx = 0.5 * (h(0, 1).real() + h(1, 0).real());
    const double by = 0.5 * (h(1, 0).imag() - h(0, 1).imag());
    const double nb = std::sqrt(bx * bx + by * by + bz * bz);
    const double c = std::cos(scale * nb);
    // sin(s|b|)/|b| with a removable singularity at |b| = 0
    const double sinc = nb > 1e-300 ? std::sin(scale * nb) / nb : scale;
    const cplx phase = std::polar(1.0, -scale * a);
    const cplx mi{0.0, -1.0};
    ComplexMatrix u(2, 2);
    u(0, 0) = phase * (c + mi * sinc * bz);
    u(1, 1) = phase * (c - mi * sinc * bz);
    u(0, 1) = phase * (mi * sinc * cplx{bx, -by});
    u(1, 0) = phase * (mi * sinc * cplx{bx, by});
    return u;
  }
  const auto eig = hermitian_eigen(h);
  ComplexMatrix u(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    const cplx ph = std::polar(1.0, -scale * eig.values[k]);
    for (std::size_t i = 0; i < d; ++i) {
      const cplx vik = eig.vectors(i, k) * ph;
      for (std::size_t j = 0; j < d; ++j) u(i, j) += vik * std::conj(eig.vectors(j, k));
    }
  }
  return u;
}

ComplexMatrix general_expm(const ComplexMatrix& a) {
  require_square(a, "general_expm");
  const std::size_t d = a.rows();
  double norm1 = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < d; ++i) col += std::abs(a(i, j));
    norm1 = std::max(norm1, col);
  }
  int squarings = 0;
  if (norm1 > 0.25) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.25)));
  const ComplexMatrix scaled = a * cplx{std::ldexp(1.0, -squarings), 0.0};
  // Taylor series to order 16 on a matrix of norm <= 1/4 is exact to double precision.
  ComplexMatrix result = ComplexMatrix::identity(d);
  ComplexMatrix term = ComplexMatrix::identity(d);
  for (int k = 1; k <= 16; ++k) {
    term = term * scaled;
    term *= cplx{1.0 / k, 0.0};
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

namespace pauli {
ComplexMatrix I() { return ComplexMatrix::identity(2); }
ComplexMatrix X() { return ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}}; }
ComplexMatrix Y() { return ComplexMatrix{{0.0, cplx{0.0, -1.0}}, {cplx{0.0, 1.0}, 0.0}}; }
ComplexMatrix Z() { return ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}}; }
}  // namespace pauli

std::vector<ComplexMatrix> pauli_strings(std::size_t n_qubits) {
  const std::vector<ComplexMatrix> single{pauli::I(), pauli::X(), pauli::Y(), pauli::Z()};
  std::vector<ComplexMatrix> out;
  if (n_qubits == 1) {
    out.assign(single.begin() + 1, single.end());
  } else if (n_qubits == 2) {
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b)
        if (a != 0 || b != 0) out.push_back(kron(single[a], single[b]));
  } else {
    throw std::invalid_argument("pauli_strings: n_qubits must be 1 or 2");
  }
  return out;
}

ComplexMatrix dressed_transform() {
  const double s = 1.0 / std::sqrt(2.0);
  return ComplexMatrix{{s, s}, {s, -s}};
}

ComplexMatrix dressed_basis_change(const ComplexMatrix& op) {
  if (op.rows() != 2 || op.cols() != 2)
    throw DimensionError("dressed_basis_change: operator must be 2x2");
  const ComplexMatrix t = dressed_transform();
  return t * op * t;
}

std::vector<cplx> vectorize(const ComplexMatrix& m) {
  return std::vector<cplx>(m.entries().begin(), m.entries().end());
}

ComplexMatrix unvectorize(std::span<const cplx> v, std::size_t dim) {
  if (v.size() != dim * dim) throw DimensionError("unvectorize: length is not dim^2");
  return ComplexMatrix(dim, dim, std::vector<cplx>(v.begin(), v.end()));
}

ComplexMatrix sandwich_superop(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_square(a, "sandwich_superop");
  require_square(b, "sandwich_superop");
  return kron(a, b.transpose());
}

ComplexMatrix unitary_superop(const ComplexMatrix& u) {
  return sandwich_superop(u, u.adjoint());
}

}  // namespace dressed
