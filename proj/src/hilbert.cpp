// Copyright 2026 The mechq Authors
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

#include "mechq/hilbert.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <string>

#include "mechq/error.hpp"

namespace mechq {

namespace {

void check_dims(int dim_qubit, int dim_fock) {
  if (dim_qubit != 1 && dim_qubit != 2)
    throw Error(Errc::invalid_dimension, "dim_qubit must be 1 or 2, got " + std::to_string(dim_qubit));
  if (dim_fock < 1) throw Error(Errc::invalid_dimension, "dim_fock must be positive");
}

void require_same_shape(const ComplexOperator& a, const ComplexOperator& b) {
  if (!a.same_shape(b))
    throw Error(Errc::dimension_mismatch, "operator shapes differ (" + std::to_string(a.dim_qubit()) + "x" +
                                              std::to_string(a.dim_fock()) + " vs " + std::to_string(b.dim_qubit()) +
                                              "x" + std::to_string(b.dim_fock()) + ")");
}

ComplexOperator qubit_matrix(cplx a00, cplx a01, cplx a10, cplx a11) {
  Matrix m(2, 2);
  m << a00, a01, a10, a11;
  return ComplexOperator(2, 1, std::move(m));
}

}  // namespace

ComplexOperator::ComplexOperator(int dim_qubit, int dim_fock, Matrix entries)
    : dim_qubit_(dim_qubit), dim_fock_(dim_fock), entries_(std::move(entries)) {
  check_dims(dim_qubit, dim_fock);
  const int d = dim_qubit * dim_fock;
  if (entries_.rows() != d || entries_.cols() != d)
    throw Error(Errc::invalid_dimension, "entries are " + std::to_string(entries_.rows()) + "x" +
                                             std::to_string(entries_.cols()) + ", expected " + std::to_string(d) +
                                             "x" + std::to_string(d));
}

ComplexOperator ComplexOperator::zero(int dim_qubit, int dim_fock) {
  check_dims(dim_qubit, dim_fock);
  const int d = dim_qubit * dim_fock;
  return ComplexOperator(dim_qubit, dim_fock, Matrix::Zero(d, d));
}

ComplexOperator ComplexOperator::identity(int dim_qubit, int dim_fock) {
  check_dims(dim_qubit, dim_fock);
  const int d = dim_qubit * dim_fock;
  return ComplexOperator(dim_qubit, dim_fock, Matrix::Identity(d, d));
}

ComplexOperator ComplexOperator::adjoint() const {
  return ComplexOperator(dim_qubit_, dim_fock_, entries_.adjoint());
}

double ComplexOperator::hermiticity_defect() const {
  return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff();
}

ComplexOperator& ComplexOperator::operator+=(const ComplexOperator& rhs) {
  require_same_shape(*this, rhs);
  entries_ += rhs.entries_;
  return *this;
}

ComplexOperator& ComplexOperator::operator-=(const ComplexOperator& rhs) {
  require_same_shape(*this, rhs);
  entries_ -= rhs.entries_;
  return *this;
}

ComplexOperator& ComplexOperator::operator*=(cplx scale) {
  entries_ *= scale;
  return *this;
}

ComplexOperator operator*(const ComplexOperator& lhs, const ComplexOperator& rhs) {
  require_same_shape(lhs, rhs);
  return ComplexOperator(lhs.dim_qubit(), lhs.dim_fock(), lhs.matrix() * rhs.matrix());
}

ComplexOperator annihilation(int dim_fock) {
  if (dim_fock < 2) throw Error(Errc::invalid_dimension, "annihilation needs dim_fock >= 2");
  Matrix m = Matrix::Zero(dim_fock, dim_fock);
  for (int n = 1; n < dim_fock; ++n) m(n - 1, n) = std::sqrt(static_cast<double>(n));
  return ComplexOperator(1, dim_fock, std::move(m));
}

ComplexOperator creation(int dim_fock) { return annihilation(dim_fock).adjoint(); }

ComplexOperator number_operator(int dim_fock) {
  if (dim_fock < 1) throw Error(Errc::invalid_dimension, "dim_fock must be positive");
  Matrix m = Matrix::Zero(dim_fock, dim_fock);
  for (int n = 0; n < dim_fock; ++n) m(n, n) = static_cast<double>(n);
  return ComplexOperator(1, dim_fock, std::move(m));
}

ComplexOperator fock_identity(int dim_fock) { return ComplexOperator::identity(1, dim_fock); }

// index 0 = g, 1 = e
ComplexOperator sigma_minus() { return qubit_matrix(0, 1, 0, 0); }
ComplexOperator sigma_plus() { return qubit_matrix(0, 0, 1, 0); }
ComplexOperator sigma_z() { return qubit_matrix(-1, 0, 0, 1); }
ComplexOperator sigma_x() { return qubit_matrix(0, 1, 1, 0); }
ComplexOperator sigma_y() { return qubit_matrix(0, cplx(0, 1), cplx(0, -1), 0); }
ComplexOperator qubit_identity() { return qubit_matrix(1, 0, 0, 1); }
ComplexOperator qubit_excited_projector() { return qubit_matrix(0, 0, 0, 1); }

ComplexOperator tensor(const ComplexOperator& qubit_factor, const ComplexOperator& fock_factor) {
  if (qubit_factor.dim_fock() != 1 || qubit_factor.dim_qubit() != 2)
    throw Error(Errc::invalid_dimension, "tensor: first factor must be a qubit operator");
  if (fock_factor.dim_qubit() != 1)
    throw Error(Errc::invalid_dimension, "tensor: second factor must be an oscillator operator");
  const int n = fock_factor.dim_fock();
  Matrix out(2 * n, 2 * n);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block(i * n, j * n, n, n) = qubit_factor(i, j) * fock_factor.matrix();
  return ComplexOperator(2, n, std::move(out));
}

ComplexOperator on_phonon(const ComplexOperator& fock_factor) { return tensor(qubit_identity(), fock_factor); }

ComplexOperator on_qubit(const ComplexOperator& qubit_factor, int dim_fock) {
  return tensor(qubit_factor, fock_identity(dim_fock));
}

Eigensystem eigh(const Matrix& h) {
  if (h.rows() != h.cols()) throw Error(Errc::invalid_dimension, "eigh: matrix is not square");
  const double defect = h.size() ? (h - h.adjoint()).cwiseAbs().maxCoeff() : 0.0;
  if (defect > 1e-10)
    throw Error(Errc::contract_violation, "eigh: input is not Hermitian (defect " + std::to_string(defect) + ")");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (h + h.adjoint()));
  if (solver.info() != Eigen::Success) throw Error(Errc::contract_violation, "eigh: decomposition failed");
  Matrix v = solver.eigenvectors();
  for (int c = 0; c < v.cols(); ++c) {
    Eigen::Index k = 0;
    v.col(c).cwiseAbs2().maxCoeff(&k);
    const cplx pivot = v(k, c);
    if (std::abs(pivot) > 0) v.col(c) *= std::conj(pivot) / std::abs(pivot);
    v(k, c) = std::abs(v(k, c));
  }
  // Generic matrices carry no dimension metadata; they are reported as oscillator-only.
  return {solver.eigenvalues(), ComplexOperator(1, static_cast<int>(h.rows()), std::move(v))};
}

Eigensystem eigh(const ComplexOperator& h) {
  Eigensystem es = eigh(h.matrix());
  es.vectors = ComplexOperator(h.dim_qubit(), h.dim_fock(), es.vectors.matrix());
  return es;
}

QuantumState QuantumState::ket(int dim_qubit, int dim_fock, Vector amplitudes) {
  check_dims(dim_qubit, dim_fock);
  if (amplitudes.size() != dim_qubit * dim_fock) throw Error(Errc::invalid_dimension, "ket length mismatch");
  const double norm = amplitudes.norm();
  if (std::abs(norm - 1.0) > 1e-10)
    throw Error(Errc::contract_violation, "ket is not normalized (norm " + std::to_string(norm) + ")");
  return QuantumState(StateKind::ket, dim_qubit, dim_fock, std::move(amplitudes), Matrix());
}

QuantumState QuantumState::density(int dim_qubit, int dim_fock, Matrix rho) {
  check_dims(dim_qubit, dim_fock);
  const int d = dim_qubit * dim_fock;
  if (rho.rows() != d || rho.cols() != d) throw Error(Errc::invalid_dimension, "density matrix size mismatch");
  const double defect = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  if (defect > 1e-10) throw Error(Errc::contract_violation, "density matrix is not Hermitian");
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) > 1e-10)
    throw Error(Errc::contract_violation, "density matrix trace is " + std::to_string(tr));
  QuantumState s(StateKind::density, dim_qubit, dim_fock, Vector(), std::move(rho));
  const double lmin = s.min_eigenvalue();
  if (lmin < -1e-9)
    throw Error(Errc::contract_violation, "density matrix has negative eigenvalue " + std::to_string(lmin));
  return s;
}

QuantumState QuantumState::density_unchecked(int dim_qubit, int dim_fock, Matrix rho) {
  check_dims(dim_qubit, dim_fock);
  if (rho.rows() != dim_qubit * dim_fock || rho.cols() != rho.rows())
    throw Error(Errc::invalid_dimension, "density matrix size mismatch");
  return QuantumState(StateKind::density, dim_qubit, dim_fock, Vector(), std::move(rho));
}

const Vector& QuantumState::amplitudes() const {
  if (kind_ != StateKind::ket) throw Error(Errc::contract_violation, "state is a density matrix, not a ket");
  return ket_;
}

Matrix QuantumState::density_matrix() const {
  if (kind_ == StateKind::density) return rho_;
  return ket_ * ket_.adjoint();
}

QuantumState QuantumState::to_density() const {
  return QuantumState(StateKind::density, dim_qubit_, dim_fock_, Vector(), density_matrix());
}

double QuantumState::trace() const {
  return kind_ == StateKind::ket ? ket_.squaredNorm() : rho_.trace().real();
}

double QuantumState::purity() const {
  if (kind_ == StateKind::ket) return 1.0;
  return (rho_ * rho_).trace().real();
}

double QuantumState::min_eigenvalue() const {
  if (kind_ == StateKind::ket) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (rho_ + rho_.adjoint()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

QuantumState basis_state(int qubit, int n, int dim_fock) {
  if (qubit < 0 || qubit > 1 || n < 0 || n >= dim_fock)
    throw Error(Errc::invalid_dimension, "basis_state index out of range");
  Vector v = Vector::Zero(2 * dim_fock);
  v(basis_index(qubit, n, dim_fock)) = 1.0;
  return QuantumState::ket(2, dim_fock, std::move(v));
}

QuantumState fock_state(int n, int dim_fock) {
  if (n < 0 || n >= dim_fock) throw Error(Errc::invalid_dimension, "fock_state index out of range");
  Vector v = Vector::Zero(dim_fock);
  v(n) = 1.0;
  return QuantumState::ket(1, dim_fock, std::move(v));
}

QuantumState reduced_phonon(const QuantumState& state) {
  const int n = state.dim_fock();
  if (state.dim_qubit() == 1) return state.to_density();
  const Matrix rho = state.density_matrix();
  Matrix out = rho.block(0, 0, n, n) + rho.block(n, n, n, n);
  return QuantumState::density_unchecked(1, n, std::move(out));
}

double qubit_excited_population(const QuantumState& state) {
  if (state.dim_qubit() != 2) throw Error(Errc::invalid_dimension, "state has no qubit factor");
  const int n = state.dim_fock();
  if (state.kind() == StateKind::ket) return state.amplitudes().tail(n).squaredNorm();
  return state.density_matrix().diagonal().tail(n).real().sum();
}

std::vector<double> fock_populations(const QuantumState& state) {
  const Matrix rho = reduced_phonon(state).density_matrix();
  std::vector<double> p(rho.rows());
  for (Eigen::Index i = 0; i < rho.rows(); ++i) p[i] = rho(i, i).real();
  return p;
}

Matrix resize_fock(const Matrix& phonon_rho, int dim_fock) {
  if (dim_fock < 1) throw Error(Errc::invalid_dimension, "dim_fock must be positive");
  Matrix out = Matrix::Zero(dim_fock, dim_fock);
  const Eigen::Index k = std::min<Eigen::Index>(dim_fock, phonon_rho.rows());
  out.topLeftCorner(k, k) = phonon_rho.topLeftCorner(k, k);
  return out;
}

Matrix expm(const Matrix& m) { return m.exp(); }

}  // namespace mechq
