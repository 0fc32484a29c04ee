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

#include "mechq/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mechq/error.hpp"

namespace mechq {

namespace {

// Kronecker product a (x) b.
Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

void check_channels(const ComplexOperator& h, const std::vector<CollapseChannel>& collapse) {
  for (const auto& c : collapse) {
    if (!(c.rate >= 0) || !std::isfinite(c.rate))
      throw Error(Errc::contract_violation, "collapse rate for '" + c.name + "' must be >= 0");
    if (!c.op.same_shape(h)) throw Error(Errc::dimension_mismatch, "collapse operator '" + c.name + "' shape");
  }
}

std::vector<Matrix> integrate(const LindbladModel& model, const Matrix& rho0, const std::vector<double>& t_grid,
                              double step) {
  std::vector<Matrix> out;
  out.reserve(t_grid.size());
  Matrix rho = rho0;
  double t = 0.0;
  for (double target : t_grid) {
    const double span = target - t;
    const long steps = span > 0 ? static_cast<long>(std::ceil(span / step - 1e-9)) : 0;
    if (steps > 0) {
      const double h = span / static_cast<double>(steps);
      if (!model.time_dependent()) {
        for (long s = 0; s < steps; ++s) {
          const Matrix k1 = model.rhs(t, rho);
          const Matrix k2 = model.rhs(t, rho + 0.5 * h * k1);
          const Matrix k3 = model.rhs(t, rho + 0.5 * h * k2);
          const Matrix k4 = model.rhs(t, rho + h * k3);
          rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
      } else {
        for (long s = 0; s < steps; ++s) {
          const double ts = t + s * h;
          const Matrix k1 = model.rhs(ts, rho);
          const Matrix k2 = model.rhs(ts + 0.5 * h, rho + 0.5 * h * k1);
          const Matrix k3 = model.rhs(ts + 0.5 * h, rho + 0.5 * h * k2);
          const Matrix k4 = model.rhs(ts + h, rho + h * k3);
          rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
      }
      if (!rho.allFinite()) throw Error(Errc::integration_failure, "state diverged; reduce the step size");
    }
    t = target;
    out.push_back(rho);
  }
  return out;
}

}  // namespace

LindbladModel::LindbladModel(ComplexOperator hamiltonian, std::vector<CollapseChannel> collapse,
                             std::vector<TimeDependentTerm> drives)
    : hamiltonian_(std::move(hamiltonian)), collapse_(std::move(collapse)), drives_(std::move(drives)) {
  if (!hamiltonian_.is_hermitian(1e-10 * std::max(1.0, hamiltonian_.matrix().cwiseAbs().maxCoeff())))
    throw Error(Errc::contract_violation, "Hamiltonian is not Hermitian");
  check_channels(hamiltonian_, collapse_);
  for (const auto& d : drives_) {
    if (!d.op.same_shape(hamiltonian_)) throw Error(Errc::dimension_mismatch, "drive operator shape");
    if (!d.coefficient) throw Error(Errc::contract_violation, "drive coefficient is empty");
  }
  k_static_ = cplx(0, -1) * hamiltonian_.matrix();
  for (const auto& c : collapse_) {
    if (c.rate == 0) continue;
    const Matrix& l = c.op.matrix();
    k_static_ -= 0.5 * c.rate * (l.adjoint() * l);
    jumps_.push_back(std::sqrt(c.rate) * l);
  }
}

Matrix LindbladModel::hamiltonian_at(double t) const {
  Matrix h = hamiltonian_.matrix();
  for (const auto& d : drives_) {
    const cplx c = d.coefficient(t);
    h += c * d.op.matrix() + std::conj(c) * d.op.matrix().adjoint();
  }
  return h;
}

Matrix LindbladModel::rhs(double t, const Matrix& rho) const {
  Matrix k = k_static_;
  for (const auto& d : drives_) {
    const cplx c = d.coefficient(t);
    if (c == cplx(0)) continue;
    k += cplx(0, -1) * (c * d.op.matrix() + std::conj(c) * d.op.matrix().adjoint());
  }
  Matrix out = k * rho;
  out += out.adjoint().eval();  // K rho + rho K' for Hermitian rho
  for (const auto& j : jumps_) out.noalias() += j * rho * j.adjoint();
  return out;
}

Matrix LindbladModel::liouvillian() const {
  if (time_dependent()) throw Error(Errc::contract_violation, "liouvillian() requires a static model");
  return mechq::liouvillian(hamiltonian_.matrix(), collapse_);
}

Matrix liouvillian(const Matrix& h, const std::vector<CollapseChannel>& collapse) {
  const Eigen::Index d = h.rows();
  const Matrix id = Matrix::Identity(d, d);
  Matrix l = cplx(0, -1) * (kron(id, h) - kron(h.transpose(), id));
  for (const auto& c : collapse) {
    if (c.rate == 0) continue;
    const Matrix& op = c.op.matrix();
    const Matrix ll = op.adjoint() * op;
    l += c.rate * (kron(op.conjugate(), op) - 0.5 * kron(id, ll) - 0.5 * kron(ll.transpose(), id));
  }
  return l;
}

Matrix unvectorize(const Vector& v, int dim) { return Eigen::Map<const Matrix>(v.data(), dim, dim); }

void check_positivity(const Matrix& rho, const std::string& context) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  const double lmin = solver.eigenvalues().minCoeff();
  if (lmin < -1e-6) {
    std::ostringstream ss;
    ss << context << ": density matrix eigenvalue " << lmin << " below -1e-6";
    throw Error(Errc::integration_failure, ss.str());
  }
  if (lmin < -1e-9) {
    std::ostringstream ss;
    ss << context << ": density matrix eigenvalue " << lmin << " below -1e-9";
    warn(ss.str());
  }
}

std::vector<QuantumState> evolve(const LindbladModel& model, const QuantumState& rho0,
                                 const std::vector<double>& t_grid, const EvolveOptions& options) {
  if (rho0.dim_qubit() != model.dim_qubit() || rho0.dim_fock() != model.dim_fock())
    throw Error(Errc::dimension_mismatch, "initial state and model dimensions differ");
  if (!(options.step > 0)) throw Error(Errc::contract_violation, "step must be positive");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 0 || (i > 0 && t_grid[i] < t_grid[i - 1]))
      throw Error(Errc::contract_violation, "t_grid must be ascending and non-negative");
  }
  const Matrix r0 = rho0.density_matrix();
  std::vector<Matrix> fine = integrate(model, r0, t_grid, options.step);
  if (options.convergence_check) {
    const std::vector<Matrix> coarse = integrate(model, r0, t_grid, 2.0 * options.step);
    double worst = 0;
    for (std::size_t i = 0; i < fine.size(); ++i)
      worst = std::max(worst, (fine[i] - coarse[i]).cwiseAbs().maxCoeff());
    if (worst > options.tolerance) {
      std::ostringstream ss;
      ss << "step-halving check failed: max local difference " << worst << " exceeds " << options.tolerance;
      throw Error(Errc::integration_failure, ss.str());
    }
  }
  std::vector<QuantumState> out;
  out.reserve(fine.size());
  for (auto& m : fine) {
    check_positivity(m, "evolve");
    Matrix herm = 0.5 * (m + m.adjoint());
    out.push_back(QuantumState::density_unchecked(model.dim_qubit(), model.dim_fock(), std::move(herm)));
  }
  return out;
}

Propagator::Propagator(const LindbladModel& model, double tau)
    : Propagator(expm(model.liouvillian() * tau), model.dim(), tau) {}

Propagator::Propagator(Matrix superoperator, int dim, double tau) : super_(std::move(superoperator)), dim_(dim), tau_(tau) {
  if (super_.rows() != static_cast<Eigen::Index>(dim) * dim || super_.cols() != super_.rows())
    throw Error(Errc::dimension_mismatch, "superoperator size does not match dim^2");
}

Matrix Propagator::apply(const Matrix& rho) const {
  if (rho.rows() != dim_ || rho.cols() != dim_) throw Error(Errc::dimension_mismatch, "propagator input size");
  const Vector v = super_ * vectorize(rho);
  return unvectorize(v, dim_);
}

QuantumState Propagator::apply(const QuantumState& rho) const {
  return QuantumState::density_unchecked(rho.dim_qubit(), rho.dim_fock(), apply(rho.density_matrix()));
}

Matrix rotate_excitation_phase(const Matrix& rho, double phi, int dim_qubit, int dim_fock) {
  const int d = dim_qubit * dim_fock;
  if (rho.rows() != d || rho.cols() != d) throw Error(Errc::dimension_mismatch, "rotate_excitation_phase size");
  Eigen::VectorXcd u(d);
  for (int q = 0; q < dim_qubit; ++q)
    for (int n = 0; n < dim_fock; ++n) u(q * dim_fock + n) = std::polar(1.0, -phi * (n + q));
  return u.asDiagonal() * rho * u.conjugate().asDiagonal();
}

QuantumState analytic_kerr_evolution(double alpha, double gamma1, double gamma_phi, double t, int dim_fock) {
  if (t < 0) throw Error(Errc::contract_violation, "t must be >= 0");
  if (dim_fock < 3) throw Error(Errc::invalid_dimension, "Kerr solution needs dim_fock >= 3");
  const double e1 = std::exp(-gamma1 * t);
  const double e2 = std::exp(-2 * gamma1 * t);
  const double p2 = 0.5 * e2;
  const double p1 = e1 - e2;
  const double p0 = 1.0 - p1 - p2;
  const cplx c02 = 0.5 * std::exp(cplx(-(gamma1 + 4 * gamma_phi) * t, alpha * t));
  Matrix rho = Matrix::Zero(dim_fock, dim_fock);
  rho(0, 0) = p0;
  rho(1, 1) = p1;
  rho(2, 2) = p2;
  rho(0, 2) = c02;
  rho(2, 0) = std::conj(c02);
  return QuantumState::density_unchecked(1, dim_fock, std::move(rho));
}

LindbladModel kerr_model(double alpha, double gamma1, double gamma_phi, int dim_fock) {
  const ComplexOperator p = annihilation(dim_fock);
  const ComplexOperator pd = p.adjoint();
  const ComplexOperator n = number_operator(dim_fock);
  ComplexOperator h = cplx(0.5 * alpha) * (pd * pd * p * p);
  return LindbladModel(std::move(h), {{"phonon_relaxation", p, gamma1}, {"phonon_dephasing", n, 2 * gamma_phi}});
}

double effective_phonon_drive(const DeviceParams& params, double delta, double omega_q_drive) {
  if (delta == 0.0) throw Error(Errc::outside_dispersive_regime, "effective drive undefined at zero detuning");
  return std::abs(params.g / delta) * omega_q_drive;
}

void DriveTerm::validate() const {
  if (!(amplitude >= 0)) throw Error(Errc::contract_violation, "drive amplitude must be >= 0");
  if (!(duration >= 0)) throw Error(Errc::contract_violation, "drive duration must be >= 0");
  if (envelope.kind == EnvelopeKind::gaussian && !(envelope.sigma > 0))
    throw Error(Errc::contract_violation, "gaussian envelope needs sigma > 0");
}

double DriveTerm::shape(double t) const {
  const double u = t - start;
  // Window edges are closed up to rounding so grid-aligned steps see the full pulse.
  const double edge = 1e-9 * duration;
  if (duration == 0 || u < -edge || u > duration + edge) return 0.0;
  if (u < 0 || u > duration) return envelope.kind == EnvelopeKind::rectangular ? 1.0 : 0.0;
  if (envelope.kind == EnvelopeKind::rectangular) return 1.0;
  // Truncated gaussian centred in the window, scaled so its integral is `duration`.
  const double s = envelope.sigma;
  const double x = u - 0.5 * duration;
  const double integral = s * std::sqrt(2 * std::numbers::pi) * std::erf(duration / (2 * std::sqrt(2.0) * s));
  return duration * std::exp(-x * x / (2 * s * s)) / integral;
}

TimeDependentTerm DriveTerm::to_term(int dim_fock) const {
  validate();
  const DriveTerm self = *this;
  return {on_qubit(sigma_plus(), dim_fock),
          [self](double t) { return 0.5 * self.amplitude * self.shape(t) * std::polar(1.0, -(self.phase + self.frequency * t)); }};
}

ComplexOperator dressed_sigma_z(double delta, double g, int dim_fock) {
  const int n_dim = dim_fock;
  Matrix z = Matrix::Zero(2 * n_dim, 2 * n_dim);
  z(0, 0) = -1.0;                      // |g0>
  z(2 * n_dim - 1, 2 * n_dim - 1) = 1.0;  // |e,N-1>: uncoupled in the truncated space
  for (int k = 1; k < n_dim; ++k) {
    const int ig = basis_index(0, k, n_dim);
    const int ie = basis_index(1, k - 1, n_dim);
    Matrix h(2, 2);
    const double gk = g * std::sqrt(static_cast<double>(k));
    h << -0.5 * delta, gk, gk, 0.5 * delta;
    const Eigensystem es = eigh(h);
    Matrix sz(2, 2);
    sz << -1, 0, 0, 1;
    Matrix block = Matrix::Zero(2, 2);
    for (int i = 0; i < 2; ++i) {
      const Vector v = es.vectors.matrix().col(i);
      const double zz = (v.adjoint() * sz * v)(0, 0).real();
      block += zz * v * v.adjoint();
    }
    const int idx[2] = {ig, ie};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) z(idx[a], idx[b]) = block(a, b);
  }
  return ComplexOperator(2, n_dim, 0.5 * (z + z.adjoint()));
}

std::vector<CollapseChannel> device_collapse(const DeviceParams& params, double delta, int dim_fock,
                                             const NoiseModel& noise) {
  std::vector<CollapseChannel> out;
  if (noise.phonon) {
    const ComplexOperator p = on_phonon(annihilation(dim_fock));
    out.push_back({"phonon_relaxation", p, params.phonon_gamma1()});
    out.push_back({"phonon_dephasing", on_phonon(number_operator(dim_fock)), 2 * std::max(0.0, params.phonon_gamma_phi())});
  }
  if (noise.qubit_relaxation) out.push_back({"qubit_relaxation", on_qubit(sigma_minus(), dim_fock), params.qubit_gamma1()});
  if (noise.qubit_dephasing) {
    const double rate = 0.5 * std::max(0.0, params.qubit_gamma_phi());
    ComplexOperator z = noise.dephasing_kind == QubitDephasing::markovian ? on_qubit(sigma_z(), dim_fock)
                                                                          : dressed_sigma_z(delta, params.g, dim_fock);
    out.push_back({"qubit_dephasing", std::move(z), rate});
  }
  return out;
}

CsvTable trajectory_table(const std::vector<double>& t, const std::vector<QuantumState>& states) {
  if (t.size() != states.size()) throw Error(Errc::dimension_mismatch, "times and states differ in length");
  CsvTable table;
  table.header.push_back("t_s");
  if (states.empty()) return table;
  const int nq = states.front().dim_qubit();
  const int nf = states.front().dim_fock();
  for (int q = 0; q < nq; ++q)
    for (int n = 0; n < nf; ++n) table.header.push_back(std::string(nq == 1 ? "p_" : (q == 0 ? "p_g" : "p_e")) + std::to_string(n));
  for (std::size_t i = 0; i < t.size(); ++i) {
    std::vector<double> row{t[i]};
    const Matrix rho = states[i].density_matrix();
    for (Eigen::Index k = 0; k < rho.rows(); ++k) row.push_back(rho(k, k).real());
    table.rows.push_back(std::move(row));
  }
  return table;
}

json snapshots_json(const std::map<std::string, QuantumState>& named) {
  json j = json::object();
  for (const auto& [name, state] : named) j[name] = state_to_json(state);
  return j;
}

}  // namespace mechq
