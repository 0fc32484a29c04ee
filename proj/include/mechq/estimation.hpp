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

// Estimators applied to simulated (or measured) records: Fock populations from
// vacuum-Rabi traces, curve fits, Wigner functions, tomography, fidelity.

#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mechq/hilbert.hpp"
#include "mechq/io.hpp"
#include "mechq/sequences.hpp"

namespace mechq {

struct FockDistribution {
  std::vector<double> populations;

  /// Entries in [0, 1] and sum 1 within 1e-9.
  void validate() const;
  double total_variation(const FockDistribution& other) const;
  json to_json() const;
};

struct FitParameter {
  std::string name;
  double value = 0;
  std::string unit;
  double stderr_ = 0;
};

struct FitResult {
  std::string model;
  std::vector<FitParameter> parameters;
  double residual_rss = 0;
  std::optional<Eigen::MatrixXd> covariance;
  int iterations = 0;

  double value(const std::string& name) const;
  double stderr_of(const std::string& name) const;
  json to_json() const;
};

struct CurveModel {
  std::string name;
  std::vector<std::string> parameter_names;
  std::vector<std::string> parameter_units;
  std::function<double(double, const Eigen::VectorXd&)> f;
};

struct FitOptions {
  int max_iterations = 2000;
  double tolerance = 1e-12;
};

/// Levenberg-Marquardt least squares. Throws fit_failure when the solver does
/// not converge, including the final RSS in the message.
FitResult curve_fit(const CurveModel& model, const std::vector<double>& x, const std::vector<double>& y,
                    const Eigen::VectorXd& initial, const FitOptions& options = {});

/// Angular frequency of the strongest non-DC periodogram peak (zero-padded,
/// uniform grid). Throws fit_initialization when no peak stands out.
double dominant_frequency(const std::vector<double>& t, const std::vector<double>& y);

/// 1/2 (1 + F (e^{-2 g1 t} - e^{-g1 t}) + e^{-(g1 + 4 gphi) t} cos(w t)),
/// F = 1 - 2 cos^4(pi / (2 sqrt2)). Fits w and gamma_phi with gamma1 fixed;
/// reports alpha = w - 2 omega_ad. With omega_ad == 0 the sign of alpha is not
/// observable and alpha_sign (+1/-1) chooses it.
FitResult fit_ramsey_anharmonicity(const MeasurementRecord& record, double gamma1, double omega_ad,
                                   double alpha_sign = 1.0);
double ramsey_model(double t, double omega, double gamma1, double gamma_phi);

/// A (1 - e^{-kappa t} cos(omega t + phi))
FitResult fit_damped_cosine(const MeasurementRecord& record);
/// A e^{-t/T1} + c
FitResult fit_exponential(const MeasurementRecord& record);
/// A e^{-t/T1} + B e^{-2t/T1} + c: decay of a state with a two-phonon admixture.
FitResult fit_ladder_decay(const MeasurementRecord& record);
/// c + A e^{-t/T2} cos(omega t + phi)
FitResult fit_decaying_oscillation(const MeasurementRecord& record);
/// A (G/2)^2 / ((d - d0)^2 + (G/2)^2) + c
FitResult fit_lorentzian(const std::vector<std::pair<double, double>>& points);

/// Simulated vacuum-Rabi traces of |n>, n = 0..n_max, on a record's time grid.
class RpnBasis {
 public:
  RpnBasis(const SequenceRunner& runner, const std::vector<double>& t, int n_max);
  /// Shared instance keyed on (g, rates, noise model, dims, grid).
  static std::shared_ptr<const RpnBasis> cached(const SequenceRunner& runner, const std::vector<double>& t,
                                                int n_max);

  const Eigen::MatrixXd& matrix() const { return basis_; }  // rows: time, cols: n
  const std::vector<double>& t() const { return t_; }
  int n_max() const { return n_max_; }
  double condition_number() const;

 private:
  std::vector<double> t_;
  int n_max_;
  Eigen::MatrixXd basis_;
};

/// min ||A p - b||^2 over the probability simplex (projected gradient + active-set polish).
Eigen::VectorXd simplex_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);
/// Euclidean projection onto {p >= 0, sum p = 1}.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

struct RpnFitOptions {
  double max_condition = 1e8;
};

/// Fock populations minimizing the residual against the simulated basis.
/// Requires a uniform time grid and n_max <= dim_fock - 2.
FockDistribution rpn_fit(const MeasurementRecord& record, const SequenceRunner& runner, int n_max,
                         const RpnFitOptions& options = {});
FockDistribution rpn_fit(const MeasurementRecord& record, const RpnBasis& basis, const RpnFitOptions& options = {});

/// W(beta) = (2/pi) Tr[D(-beta) rho D(beta) Pi] for an oscillator-only state.
/// Warns when the top two Fock levels hold more than 1e-4 population.
std::vector<double> wigner(const QuantumState& rho, const std::vector<cplx>& grid);
/// n x n grid over [-extent, extent]^2, row-major in (re, im) with re varying slowest.
std::vector<cplx> square_grid(double extent, int n);

struct WignerSample {
  cplx beta;
  double value = 0;
};

struct MleOptions {
  int max_iterations = 500;
  double tolerance = 1e-9;
  std::uint64_t seed = 0;  // perturbation of the starting point
};

/// Maximum-likelihood density matrix (Gaussian Wigner-sample model) on Fock
/// levels 0..n_max, parameterized as T'T / Tr(T'T) with T lower triangular.
QuantumState mle_reconstruct(const std::vector<WignerSample>& samples, int n_max, const MleOptions& options = {});

/// Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)) (root convention; pure
/// states give |<psi|phi>|).
double fidelity(const QuantumState& rho, const QuantumState& sigma);

}  // namespace mechq
