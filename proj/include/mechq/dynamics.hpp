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

// Open-system evolution on the truncated qubit (x) Fock space.
//
//   d rho/dt = -i[H(t), rho] + sum_k rate_k (L_k rho L_k' - 1/2 {L_k' L_k, rho})
//
// Two engines: a fixed-step RK4 integrator for arbitrary time dependence, and
// exact superoperator exponentials for piecewise-constant schedules.

#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mechq/device_model.hpp"
#include "mechq/hilbert.hpp"
#include "mechq/io.hpp"

namespace mechq {

struct CollapseChannel {
  std::string name;
  ComplexOperator op;
  double rate = 0;  // 1/s
};

/// Adds c(t) * op + conj(c(t)) * op^dagger to the Hamiltonian.
struct TimeDependentTerm {
  ComplexOperator op;
  std::function<cplx(double)> coefficient;
};

class LindbladModel {
 public:
  explicit LindbladModel(ComplexOperator hamiltonian, std::vector<CollapseChannel> collapse = {},
                         std::vector<TimeDependentTerm> drives = {});

  const ComplexOperator& hamiltonian() const { return hamiltonian_; }
  const std::vector<CollapseChannel>& collapse() const { return collapse_; }
  const std::vector<TimeDependentTerm>& drives() const { return drives_; }
  bool time_dependent() const { return !drives_.empty(); }
  int dim_qubit() const { return hamiltonian_.dim_qubit(); }
  int dim_fock() const { return hamiltonian_.dim_fock(); }
  int dim() const { return hamiltonian_.dim(); }

  Matrix hamiltonian_at(double t) const;
  /// Right-hand side of the master equation.
  Matrix rhs(double t, const Matrix& rho) const;
  /// Column-stacking superoperator of the static part; throws if time dependent.
  Matrix liouvillian() const;

 private:
  ComplexOperator hamiltonian_;
  std::vector<CollapseChannel> collapse_;
  std::vector<TimeDependentTerm> drives_;
  Matrix k_static_;            // -iH - 1/2 sum rate L'L
  std::vector<Matrix> jumps_;  // sqrt(rate) L
};

/// Column-stacking Liouvillian for a fixed Hamiltonian matrix.
Matrix liouvillian(const Matrix& hamiltonian, const std::vector<CollapseChannel>& collapse);

inline Vector vectorize(const Matrix& rho) { return Eigen::Map<const Vector>(rho.data(), rho.size()); }
Matrix unvectorize(const Vector& v, int dim);

struct EvolveOptions {
  double step = 1e-9;             // seconds
  bool convergence_check = true;  // re-run at step/2 and compare
  double tolerance = 1e-7;        // max-abs difference allowed between the two runs
};

/// Fixed-step RK4 integration; returns one state per entry of t_grid (which
/// must be ascending and start at or after 0, the time of rho0).
std::vector<QuantumState> evolve(const LindbladModel& model, const QuantumState& rho0,
                                 const std::vector<double>& t_grid, const EvolveOptions& options = {});

/// Post-hoc positivity guard: warns below -1e-9, throws integration_failure below -1e-6.
void check_positivity(const Matrix& rho, const std::string& context);

/// exp(L tau) of a time-independent model.
class Propagator {
 public:
  Propagator(const LindbladModel& model, double tau);
  Propagator(Matrix superoperator, int dim, double tau);

  Matrix apply(const Matrix& rho) const;
  QuantumState apply(const QuantumState& rho) const;
  const Matrix& superoperator() const { return super_; }
  int dim() const { return dim_; }
  double duration() const { return tau_; }

 private:
  Matrix super_;
  int dim_;
  double tau_;
};

/// rho -> U rho U' with U = exp(-i phi N) and N the total excitation number.
/// For excitation-conserving dynamics this converts a drive phase into a frame
/// rotation: P_phi = Z(phi) P_0 Z(-phi).
Matrix rotate_excitation_phase(const Matrix& rho, double phi, int dim_qubit, int dim_fock);

/// Kerr oscillator H = (alpha/2) p'p'pp with loss gamma1 (operator p) and
/// dephasing 2 gamma_phi (operator p'p), started from (|0> + |2>)/sqrt2.
/// Oscillator-only state (dim_qubit == 1).
QuantumState analytic_kerr_evolution(double alpha, double gamma1, double gamma_phi, double t,
                                     int dim_fock = kDefaultFockDim);
LindbladModel kerr_model(double alpha, double gamma1, double gamma_phi, int dim_fock = kDefaultFockDim);

/// Mediated phonon drive strength |g/delta| * omega_q_drive.
double effective_phonon_drive(const DeviceParams& params, double delta, double omega_q_drive);

enum class EnvelopeKind { rectangular, gaussian };

struct Envelope {
  EnvelopeKind kind = EnvelopeKind::rectangular;
  double sigma = 0;  // gaussian width, seconds
};

/// Charge-line drive on the qubit: (amplitude/2) s(t) (e^{-i(phase + frequency t)} s+ + h.c.),
/// with frequency measured in the simulation frame and s(t) area-normalized
/// so that its integral equals duration (same area as the rectangular pulse).
struct DriveTerm {
  double amplitude = 0;
  double frequency = 0;
  double phase = 0;
  double start = 0;
  double duration = 0;
  Envelope envelope;

  void validate() const;
  double shape(double t) const;
  double pulse_area() const { return amplitude * duration; }
  TimeDependentTerm to_term(int dim_fock) const;
};

enum class QubitDephasing {
  markovian,     // sigma_z at the Ramsey rate
  quasi_static,  // sigma_z projected onto the dressed eigenbasis (secular)
};

struct NoiseModel {
  bool phonon = true;
  bool qubit_relaxation = true;
  bool qubit_dephasing = true;
  QubitDephasing dephasing_kind = QubitDephasing::quasi_static;

  static NoiseModel none() { return {false, false, false, QubitDephasing::quasi_static}; }
  bool lossless() const { return !phonon && !qubit_relaxation && !qubit_dephasing; }
};

/// sigma_z with all coherences between different eigenstates of the JC
/// Hamiltonian at detuning delta removed.
ComplexOperator dressed_sigma_z(double delta, double g, int dim_fock);

std::vector<CollapseChannel> device_collapse(const DeviceParams& params, double delta, int dim_fock,
                                             const NoiseModel& noise);

/// t_s, p_g0..p_g{N-1}, p_e0..p_e{N-1}
CsvTable trajectory_table(const std::vector<double>& t, const std::vector<QuantumState>& states);
json snapshots_json(const std::map<std::string, QuantumState>& named);

}  // namespace mechq
