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

// Truncated qubit (x) Fock space linear algebra.
//
// Basis ordering is qubit-major: |g,0>, |g,1>, ..., |g,N-1>, |e,0>, ..., |e,N-1>.
// sigma_z has |e> as its +1 eigenstate. A factor that lives only on the qubit
// has dim_fock == 1; a factor that lives only on the oscillator (or a reduced
// phonon state) has dim_qubit == 1.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace mechq {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr int kDefaultFockDim = 10;

class ComplexOperator {
 public:
  ComplexOperator() : ComplexOperator(1, 1, Matrix::Zero(1, 1)) {}
  ComplexOperator(int dim_qubit, int dim_fock, Matrix entries);

  static ComplexOperator zero(int dim_qubit, int dim_fock);
  static ComplexOperator identity(int dim_qubit, int dim_fock);

  int dim_qubit() const { return dim_qubit_; }
  int dim_fock() const { return dim_fock_; }
  int dim() const { return dim_qubit_ * dim_fock_; }
  const Matrix& matrix() const { return entries_; }
  cplx operator()(int row, int col) const { return entries_(row, col); }

  ComplexOperator adjoint() const;
  // max |H - H^dagger|
  double hermiticity_defect() const;
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect() <= tol; }
  bool same_shape(const ComplexOperator& other) const {
    return dim_qubit_ == other.dim_qubit_ && dim_fock_ == other.dim_fock_;
  }

  ComplexOperator& operator+=(const ComplexOperator& rhs);
  ComplexOperator& operator-=(const ComplexOperator& rhs);
  ComplexOperator& operator*=(cplx scale);

  friend ComplexOperator operator+(ComplexOperator lhs, const ComplexOperator& rhs) { return lhs += rhs; }
  friend ComplexOperator operator-(ComplexOperator lhs, const ComplexOperator& rhs) { return lhs -= rhs; }
  friend ComplexOperator operator*(ComplexOperator lhs, cplx s) { return lhs *= s; }
  friend ComplexOperator operator*(cplx s, ComplexOperator rhs) { return rhs *= s; }
  friend ComplexOperator operator*(const ComplexOperator& lhs, const ComplexOperator& rhs);

 private:
  int dim_qubit_;
  int dim_fock_;
  Matrix entries_;
};

// Fock factor operators (dim_qubit == 1).
ComplexOperator annihilation(int dim_fock);
ComplexOperator creation(int dim_fock);
ComplexOperator number_operator(int dim_fock);
ComplexOperator fock_identity(int dim_fock);

// Qubit factor operators (dim_fock == 1). sigma_minus maps |e> -> |g>.
ComplexOperator sigma_minus();
ComplexOperator sigma_plus();
ComplexOperator sigma_z();
ComplexOperator sigma_x();
ComplexOperator sigma_y();
ComplexOperator qubit_identity();
ComplexOperator qubit_excited_projector();

/// Kronecker product in the fixed order qubit (x) fock.
ComplexOperator tensor(const ComplexOperator& qubit_factor, const ComplexOperator& fock_factor);

// Shorthands lifting a factor onto the composite space.
ComplexOperator on_phonon(const ComplexOperator& fock_factor);
ComplexOperator on_qubit(const ComplexOperator& qubit_factor, int dim_fock);

struct Eigensystem {
  RealVector values;       // ascending
  ComplexOperator vectors; // columns; largest-magnitude component real positive
};

/// Hermitian eigendecomposition. Throws Errc::contract_violation when the input
/// deviates from Hermitian by more than 1e-10 (max-norm).
Eigensystem eigh(const ComplexOperator& hermitian);
Eigensystem eigh(const Matrix& hermitian);

enum class StateKind { ket, density };

class QuantumState {
 public:
  /// Validates unit norm within 1e-10.
  static QuantumState ket(int dim_qubit, int dim_fock, Vector amplitudes);
  /// Validates Hermiticity, unit trace (1e-10) and min eigenvalue >= -1e-9.
  static QuantumState density(int dim_qubit, int dim_fock, Matrix rho);
  /// For integrator output that has already been checked by its producer.
  static QuantumState density_unchecked(int dim_qubit, int dim_fock, Matrix rho);

  StateKind kind() const { return kind_; }
  int dim_qubit() const { return dim_qubit_; }
  int dim_fock() const { return dim_fock_; }
  int dim() const { return dim_qubit_ * dim_fock_; }

  const Vector& amplitudes() const;
  Matrix density_matrix() const;
  QuantumState to_density() const;

  double trace() const;
  double purity() const;
  double min_eigenvalue() const;

 private:
  QuantumState(StateKind kind, int dim_qubit, int dim_fock, Vector ket, Matrix rho)
      : kind_(kind), dim_qubit_(dim_qubit), dim_fock_(dim_fock), ket_(std::move(ket)), rho_(std::move(rho)) {}

  StateKind kind_;
  int dim_qubit_;
  int dim_fock_;
  Vector ket_;
  Matrix rho_;
};

inline int basis_index(int qubit, int n, int dim_fock) { return qubit * dim_fock + n; }

/// |q, n> on the composite space (q = 0 ground, 1 excited).
QuantumState basis_state(int qubit, int n, int dim_fock);
/// |n> on the oscillator alone.
QuantumState fock_state(int n, int dim_fock);

QuantumState reduced_phonon(const QuantumState& state);
double qubit_excited_population(const QuantumState& state);
/// Diagonal of the reduced phonon state.
std::vector<double> fock_populations(const QuantumState& state);

/// Pads (or truncates) an oscillator-only density matrix to a new Fock dimension.
Matrix resize_fock(const Matrix& phonon_rho, int dim_fock);

Matrix expm(const Matrix& m);

}  // namespace mechq
