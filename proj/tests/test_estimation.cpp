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

#include <cmath>
#include <random>

#include "mechq/estimation.hpp"
#include "mechq/units.hpp"
#include "support.hpp"

using namespace mechq;
using namespace mechq::testing;
using units::khz;
using units::mhz;

namespace {

MeasurementRecord synth(const std::vector<double>& t, const std::function<double(double)>& f) {
  MeasurementRecord r;
  r.sequence_id = "synthetic";
  r.t = t;
  for (double x : t) r.p_excited.push_back(f(x));
  return r;
}

QuantumState ket_phonon(std::vector<cplx> amps, int dim) {
  Vector v = Vector::Zero(dim);
  for (std::size_t i = 0; i < amps.size(); ++i) v(i) = amps[i];
  return QuantumState::ket(1, dim, v / v.norm());
}

std::vector<WignerSample> sample(const QuantumState& s, double extent, int n) {
  const auto grid = square_grid(extent, n);
  const auto w = wigner(s, grid);
  std::vector<WignerSample> out;
  for (std::size_t i = 0; i < grid.size(); ++i) out.push_back({grid[i], w[i]});
  return out;
}

}  // namespace

TEST(Fit, RamseyRecoversAlpha) {
  const double alpha = khz(-17.45), ad = khz(100), g1 = 1 / 104e-6;
  const double w = alpha + 2 * ad;
  const auto rec = synth(linspace(0, 50e-6, 101), [&](double t) { return ramsey_model(t, w, g1, 2e3); });
  const auto fit = fit_ramsey_anharmonicity(rec, g1, ad);
  EXPECT_NEAR(units::to_khz(fit.value("alpha")), -17.45, 0.2);
  EXPECT_NEAR(fit.value("gamma_phi"), 2e3, 50);
}

TEST(Fit, RamseyModelStartsAtOne) { EXPECT_NEAR(ramsey_model(0, 1e5, 1e4, 1e3), 1.0, 1e-15); }

TEST(Fit, ExponentialIsExact) {
  const auto rec = synth(linspace(0, 400e-6, 101), [](double t) { return 0.8 * std::exp(-t / 104e-6) + 0.05; });
  const auto fit = fit_exponential(rec);
  EXPECT_NEAR(fit.value("T1"), 104e-6, 0.104e-6);
  EXPECT_NEAR(fit.value("c"), 0.05, 1e-6);
}

TEST(Fit, LadderDecay) {
  const auto rec = synth(linspace(0, 400e-6, 101), [](double t) {
    return 0.7 * std::exp(-t / 104e-6) + 0.1 * std::exp(-2 * t / 104e-6) + 0.02;
  });
  EXPECT_NEAR(fit_ladder_decay(rec).value("T1"), 104e-6, 0.5e-6);
}

TEST(Fit, DampedCosineWithoutDamping) {
  const double w = khz(10.6);
  const auto rec = synth(linspace(0, 150e-6, 121), [&](double t) { return 0.45 * (1 - std::cos(w * t)); });
  const auto fit = fit_damped_cosine(rec);
  EXPECT_NEAR(fit.value("kappa"), 0.0, 1.0);
  EXPECT_NEAR(fit.value("omega"), w, 1e-3 * w);
  EXPECT_NEAR(fit.value("A"), 0.45, 1e-4);
}

TEST(Fit, DecayingOscillation) {
  const double w = khz(20);
  const auto rec = synth(linspace(0, 400e-6, 101),
                         [&](double t) { return 0.5 + 0.3 * std::exp(-t / 205e-6) * std::cos(w * t + 0.3); });
  const auto fit = fit_decaying_oscillation(rec);
  EXPECT_NEAR(fit.value("T2"), 205e-6, 2e-6);
  EXPECT_NEAR(fit.value("omega"), w, 1e-3 * w);
}

TEST(Fit, LorentzianCentre) {
  std::vector<std::pair<double, double>> pts;
  const double d0 = khz(3.2), gam = khz(4);
  for (double d : linspace(-khz(40), khz(40), 81))
    pts.emplace_back(d, 0.3 * std::pow(gam / 2, 2) / (std::pow(d - d0, 2) + std::pow(gam / 2, 2)) + 0.01);
  const auto fit = fit_lorentzian(pts);
  EXPECT_NEAR(units::to_khz(fit.value("delta0")), 3.2, 0.3);
  EXPECT_NEAR(fit.value("Gamma"), gam, 0.01 * gam);
}

TEST(Fit, FlatRecordHasNoFrequency) {
  const auto rec = synth(linspace(0, 1e-4, 64), [](double) { return 0.5; });
  EXPECT_ERRC(dominant_frequency(rec.t, rec.p_excited), Errc::fit_initialization);
  EXPECT_ERRC(fit_ramsey_anharmonicity(rec, 1e4, khz(100)), Errc::fit_initialization);
}

TEST(Fit, ParametersCarryUnitsInJson) {
  const auto rec = synth(linspace(0, 400e-6, 51), [](double t) { return std::exp(-t / 1e-4); });
  const json j = fit_exponential(rec).to_json();
  EXPECT_EQ(j["model"], "exponential");
  bool found = false;
  for (const auto& p : j["parameters"])
    if (p["name"] == "T1") found = p["unit"] == "s";
  EXPECT_TRUE(found);
}

TEST(Simplex, ProjectionProperties) {
  Eigen::VectorXd v(4);
  v << 0.4, -0.3, 1.2, 0.1;
  const auto p = project_to_simplex(v);
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_NEAR((project_to_simplex(p) - p).norm(), 0.0, 1e-14);
}

TEST(Simplex, LeastSquaresHitsInteriorOptimum) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  Eigen::MatrixXd a(30, 4);
  for (int i = 0; i < a.size(); ++i) a.data()[i] = u(rng);
  Eigen::VectorXd p(4);
  p << 0.1, 0.5, 0.3, 0.1;
  EXPECT_NEAR((simplex_least_squares(a, a * p) - p).norm(), 0.0, 1e-7);
}

TEST(Rpn, RecoversFockOne) {
  RunnerOptions o;
  o.dim_fock = 8;
  SequenceRunner r(DeviceParams::reference(), o);
  const auto rec = run_rpn(r, fock_state(1, 8), 10e-6, 101);
  const auto d = rpn_fit(rec, r, 4);
  EXPECT_NEAR(d.populations[1], 1.0, 1e-6);
  d.validate();
}

TEST(Rpn, RecoversMixture) {
  RunnerOptions o;
  o.dim_fock = 8;
  SequenceRunner r(DeviceParams::reference(), o);
  Matrix rho = Matrix::Zero(8, 8);
  rho(0, 0) = 0.2, rho(1, 1) = 0.5, rho(2, 2) = 0.3;
  const auto rec = run_rpn(r, QuantumState::density(1, 8, rho), 10e-6, 101);
  const auto d = rpn_fit(rec, r, 4);
  EXPECT_NEAR(d.populations[0], 0.2, 1e-6);
  EXPECT_NEAR(d.populations[1], 0.5, 1e-6);
  EXPECT_NEAR(d.populations[2], 0.3, 1e-6);
}

TEST(Rpn, ContractChecks) {
  RunnerOptions o;
  o.dim_fock = 6;
  SequenceRunner r(DeviceParams::reference(), o);
  const auto rec = run_rpn(r, fock_state(0, 6), 10e-6, 51);
  EXPECT_ERRC(rpn_fit(rec, r, 5), Errc::contract_violation);
  // Two samples cannot separate five populations.
  const auto tiny = run_rpn(r, fock_state(0, 6), 1e-9, 2);
  EXPECT_ERRC(rpn_fit(tiny, r, 4), Errc::ill_conditioned_basis);
}

TEST(Rpn, TotalVariation) {
  FockDistribution a{{1, 0, 0}}, b{{0.5, 0.5, 0}};
  EXPECT_DOUBLE_EQ(a.total_variation(b), 0.5);
  EXPECT_ERRC((FockDistribution{{0.7, 0.7}}.validate()), Errc::contract_violation);
}

TEST(Wigner, VacuumAndFockOneAtOrigin) {
  const auto w0 = wigner(fock_state(0, 8), {cplx(0)});
  const auto w1 = wigner(fock_state(1, 8), {cplx(0)});
  EXPECT_NEAR(w0[0], 2 / M_PI, 1e-12);
  EXPECT_NEAR(w1[0], -2 / M_PI, 1e-12);
}

TEST(Wigner, CoherentStateIsDisplacedGaussian) {
  // Truncated coherent state with beta = 0.7.
  const cplx b0(0.7, 0);
  std::vector<cplx> amps;
  double fact = 1;
  for (int n = 0; n < 20; ++n) {
    if (n > 0) fact *= n;
    amps.push_back(std::exp(-0.5 * std::norm(b0)) * std::pow(b0, n) / std::sqrt(fact));
  }
  const auto s = ket_phonon(amps, 20);
  for (cplx b : {cplx(0.7, 0), cplx(0, 0.5), cplx(-0.4, 0.3)})
    EXPECT_NEAR(wigner(s, {b})[0], 2 / M_PI * std::exp(-2 * std::norm(b - b0)), 1e-8);
}

TEST(Wigner, Normalization) {
  const auto s = ket_phonon({1, cplx(0, 1)}, 8);
  const int n = 81;
  const double ext = 4;
  const auto w = wigner(s, square_grid(ext, n));
  double sum = 0;
  for (double x : w) sum += x;
  const double da = std::pow(2 * ext / (n - 1), 2);
  EXPECT_NEAR(sum * da, 1.0, 0.02);
}

TEST(Wigner, RejectsCompositeState) {
  EXPECT_ERRC(wigner(basis_state(0, 0, 4), {cplx(0)}), Errc::contract_violation);
}

TEST(Wigner, GridLayout) {
  const auto g = square_grid(1.0, 3);
  ASSERT_EQ(g.size(), 9u);
  EXPECT_EQ(g[0], cplx(-1, -1));
  EXPECT_EQ(g[1], cplx(-1, 0));
  EXPECT_EQ(g[3], cplx(0, -1));
}

TEST(Mle, Vacuum) {
  const auto rho = mle_reconstruct(sample(fock_state(0, 6), 2.5, 21), 3);
  EXPECT_GE(fidelity(rho, fock_state(0, 4)), 0.999);
}

TEST(Mle, Superposition) {
  const auto target = ket_phonon({1, cplx(0, 1)}, 6);
  const auto rho = mle_reconstruct(sample(target, 2.5, 21), 3);
  EXPECT_GE(fidelity(rho, ket_phonon({1, cplx(0, 1)}, 4)), 0.999);
}

TEST(Mle, NoisyInputStaysPhysical) {
  auto s = sample(ket_phonon({1, 1, 0.5}, 6), 2.5, 21);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0, 0.05);
  for (auto& x : s) x.value += noise(rng);
  const auto rho = mle_reconstruct(s, 3);
  EXPECT_GE(rho.min_eigenvalue(), -1e-12);
  EXPECT_NEAR(rho.trace(), 1.0, 1e-10);
  const Matrix m = rho.density_matrix();
  EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GE(fidelity(rho, ket_phonon({1, 1, 0.5}, 4)), 0.95);
}

TEST(Mle, UnderDetermined) {
  EXPECT_ERRC(mle_reconstruct(sample(fock_state(0, 6), 2.0, 3), 3), Errc::under_determined);
}

TEST(Fidelity, Cases) {
  const auto a = ket_phonon({1, 0}, 3), b = ket_phonon({0, 1}, 3), c = ket_phonon({1, 1}, 3);
  EXPECT_NEAR(fidelity(a, a), 1.0, 1e-12);
  EXPECT_NEAR(fidelity(a, b), 0.0, 1e-7);
  EXPECT_NEAR(fidelity(a, c), 1 / std::sqrt(2.0), 1e-7);
  Matrix mix = Matrix::Zero(3, 3);
  mix(0, 0) = mix(1, 1) = 0.5;
  EXPECT_NEAR(fidelity(QuantumState::density(1, 3, mix), a), std::sqrt(0.5), 1e-7);
  EXPECT_ERRC(fidelity(a, fock_state(0, 4)), Errc::dimension_mismatch);
}
