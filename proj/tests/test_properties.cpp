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

// Randomized invariants. Every generator is seeded so failures reproduce.

#include <cmath>
#include <numeric>
#include <random>

#include "mechq/dynamics.hpp"
#include "mechq/estimation.hpp"
#include "mechq/units.hpp"
#include "support.hpp"

using namespace mechq;
using namespace mechq::testing;
using units::khz;
using units::mhz;

TEST(Property, LindbladPreservesPhysicality) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> rate(1e3, 1e5);
  for (int trial = 0; trial < 10; ++trial) {
    const int nf = 4;
    const Matrix h = mhz(0.5) * random_hermitian(rng, 2 * nf);
    std::vector<CollapseChannel> c;
    for (int k = 0; k < 3; ++k) c.push_back({"c" + std::to_string(k), ComplexOperator(2, nf, random_matrix(rng, 2 * nf)), rate(rng)});
    LindbladModel m(ComplexOperator(2, nf, h), c);
    const auto rho0 = QuantumState::density(2, nf, random_density(rng, 2 * nf, 2));
    const auto out = evolve(m, rho0, linspace(0, 2e-6, 5));
    for (const auto& s : out) {
      const Matrix r = s.density_matrix();
      EXPECT_NEAR(s.trace(), 1.0, 1e-9) << trial;
      EXPECT_LT((r - r.adjoint()).cwiseAbs().maxCoeff(), 1e-12) << trial;
      EXPECT_GT(s.min_eigenvalue(), -1e-9) << trial;
      EXPECT_LE(s.purity(), 1.0 + 1e-9) << trial;
    }
  }
}

TEST(Property, PropagatorAgreesWithIntegrator) {
  std::mt19937_64 rng(102);
  for (int trial = 0; trial < 5; ++trial) {
    const int nf = 3;
    LindbladModel m(ComplexOperator(2, nf, mhz(0.3) * random_hermitian(rng, 2 * nf)),
                    {{"a", ComplexOperator(2, nf, random_matrix(rng, 2 * nf)), 2e4}});
    const auto rho0 = QuantumState::density(2, nf, random_density(rng, 2 * nf));
    const auto rk = evolve(m, rho0, {1e-6}).back().density_matrix();
    const auto ex = Propagator(m, 1e-6).apply(rho0.density_matrix());
    EXPECT_LT((rk - ex).cwiseAbs().maxCoeff(), 1e-8) << trial;
  }
}

TEST(Property, SimplexProjectionIsNearestPoint) {
  std::mt19937_64 rng(103);
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd v(6);
    for (auto& x : v) x = n(rng);
    const auto p = project_to_simplex(v);
    ASSERT_NEAR(p.sum(), 1.0, 1e-12);
    ASSERT_GE(p.minCoeff(), 0.0);
    for (int k = 0; k < 5; ++k) {
      Eigen::VectorXd q(6);
      for (auto& x : q) x = -std::log(u(rng) + 1e-300);
      q /= q.sum();
      ASSERT_LE((v - p).norm(), (v - q).norm() + 1e-12);
    }
  }
}

TEST(Property, FidelitySymmetricAndBounded) {
  std::mt19937_64 rng(104);
  for (int trial = 0; trial < 50; ++trial) {
    const int d = 2 + trial % 5;
    const auto a = QuantumState::density(1, d, random_density(rng, d, 1 + trial % d));
    const auto b = QuantumState::density(1, d, random_density(rng, d));
    const double fab = fidelity(a, b), fba = fidelity(b, a);
    EXPECT_NEAR(fab, fba, 1e-6);
    EXPECT_GE(fab, 0.0);
    EXPECT_LE(fab, 1.0);
    EXPECT_NEAR(fidelity(b, b), 1.0, 1e-6);
    // Unitary invariance.
    const Eigensystem es = eigh(random_hermitian(rng, d));
    const Matrix u = es.vectors.matrix();
    const auto ua = QuantumState::density(1, d, u * a.density_matrix() * u.adjoint());
    const auto ub = QuantumState::density(1, d, u * b.density_matrix() * u.adjoint());
    EXPECT_NEAR(fidelity(ua, ub), fab, 1e-6);
  }
}

TEST(Property, WignerBoundedByParity) {
  std::mt19937_64 rng(105);
  const auto grid = square_grid(2.0, 11);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix rho = Matrix::Zero(10, 10);
    rho.topLeftCorner(5, 5) = random_density(rng, 5);
    const auto w = wigner(QuantumState::density(1, 10, rho), grid);
    for (double x : w) ASSERT_LE(std::abs(x), 2 / M_PI + 1e-10);
  }
}

TEST(Property, AnharmonicityMatchesSpectrum) {
  std::mt19937_64 rng(106);
  std::uniform_real_distribution<double> d(0.6, 8.0), gg(50, 500);
  for (int trial = 0; trial < 100; ++trial) {
    const double delta = (trial % 2 ? 1 : -1) * mhz(d(rng));
    const double g = khz(gg(rng));
    const double a = anharmonicity(delta, g);
    EXPECT_NEAR(a, anharmonicity_from_spectrum(delta, g), 1e-6 * std::abs(a) + 1e-9);
    EXPECT_GT(a * delta, 0.0);
  }
}

TEST(Property, ShotNoiseIsSeedDeterministic) {
  MeasurementRecord rec;
  rec.t = linspace(0, 1, 40);
  for (double t : rec.t) rec.p_excited.push_back(0.5 + 0.4 * std::cos(7 * t));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ReadoutModel m{1.0, 0.0, 300, seed};
    EXPECT_EQ(m.apply(rec).p_excited, m.apply(rec).p_excited);
  }
}

TEST(Property, RamseyFitUnbiasedUnderShotNoise) {
  RunnerOptions o;
  o.dim_fock = 8;
  SequenceRunner r(DeviceParams::reference(), o);
  const double ad = khz(100), g1 = r.params().phonon_gamma1();
  const auto exact = run_ramsey_anharmonicity(r, mhz(-0.71), ad, 50e-6, 101);
  const double truth = fit_ramsey_anharmonicity(exact, g1, ad).value("alpha");
  std::vector<double> est;
  for (std::uint64_t seed = 0; seed < 50; ++seed)
    est.push_back(fit_ramsey_anharmonicity(ReadoutModel{1.0, 0.0, 2000, seed}.apply(exact), g1, ad).value("alpha"));
  const double mean = std::accumulate(est.begin(), est.end(), 0.0) / est.size();
  double var = 0;
  for (double x : est) var += (x - mean) * (x - mean) / (est.size() - 1);
  const double sem = std::sqrt(var / est.size());
  EXPECT_LT(std::abs(mean - truth), 3 * sem) << "mean " << mean << " truth " << truth << " sem " << sem;
}

TEST(Property, MleResidualsMatchNoiseLevel) {
  std::mt19937_64 rng(107);
  Vector v = Vector::Zero(6);
  v(0) = 1, v(1) = cplx(0, 0.8), v(2) = 0.3;
  const auto target = QuantumState::ket(1, 6, v / v.norm());
  const auto grid = square_grid(2.5, 21);
  const auto w = wigner(target, grid);
  const double sigma = 0.01;
  std::normal_distribution<double> noise(0, sigma);
  std::vector<WignerSample> s;
  for (std::size_t i = 0; i < grid.size(); ++i) s.push_back({grid[i], w[i] + noise(rng)});
  const auto rho = mle_reconstruct(s, 3);
  const auto wf = wigner(rho, grid);
  double chi2 = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) chi2 += std::pow((s[i].value - wf[i]) / sigma, 2);
  const double dof = static_cast<double>(grid.size()) - 15;
  EXPECT_NEAR(chi2 / dof, 1.0, 0.2);
}
