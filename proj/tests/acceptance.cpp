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

// Acceptance run: one PASS/FAIL line per criterion, details indented below it.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mechq/device_model.hpp"
#include "mechq/dynamics.hpp"
#include "mechq/estimation.hpp"
#include "mechq/parallel.hpp"
#include "mechq/sequences.hpp"
#include "mechq/units.hpp"

using namespace mechq;
using units::khz;
using units::mhz;

namespace {

const double kG = khz(280);
const double kOp = mhz(-0.71);

class Criterion {
 public:
  explicit Criterion(std::string title) : title_(std::move(title)) {}
  // Records one sub-check; returns ok so callers can chain.
  bool check(bool ok, const std::string& what) {
    lines_.push_back(std::string(ok ? "    ok   " : "    FAIL ") + what);
    pass_ = pass_ && ok;
    return ok;
  }
  void note(const std::string& s) { lines_.push_back("    .    " + s); }
  bool passed() const { return pass_; }
  void print(int index, double seconds) const {
    std::printf("criterion %d: %s  %s  (%.1f s)\n", index, pass_ ? "PASS" : "FAIL", title_.c_str(), seconds);
    for (const auto& l : lines_) std::printf("%s\n", l.c_str());
    std::fflush(stdout);
  }

 private:
  std::string title_;
  std::vector<std::string> lines_;
  bool pass_ = true;
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Matrix random_density(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0, 1);
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = cplx(n(rng), n(rng));
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

// ---------------------------------------------------------------------------

void anharmonicity_theory(Criterion& c) {
  const double deltas[] = {-4, -2, -0.71};
  const double quoted[] = {0.2, 1.37, 17.3};
  for (int i = 0; i < 3; ++i) {
    const double a = std::abs(units::to_khz(anharmonicity(mhz(deltas[i]), kG)));
    c.check(rel(a, quoted[i]) <= 0.03,
            fmt("delta %.2f MHz: |alpha| = %.4f kHz vs %.2f kHz (%.1f%%, limit 3%%)", deltas[i], a, quoted[i],
                100 * rel(a, quoted[i])));
  }
  const double d = -50 * kG;
  const double exact = anharmonicity(d, kG), approx = anharmonicity_dispersive(d, kG);
  c.check(rel(approx, exact) <= 0.01, fmt("|delta| = 50 g: 2g^4/delta^3 off by %.3f%% (limit 1%%)", 100 * rel(approx, exact)));
}

void hybridization(Criterion& c) {
  const double p1 = phonon_weight(kOp, kG, 1), p2 = phonon_weight(kOp, kG, 2);
  c.check(std::abs(p1 - 0.893) <= 0.002, fmt("p_p1 = %.5f (target 0.893 +- 0.002)", p1));
  c.check(std::abs((1 - p2) - 0.164) <= 0.003, fmt("1 - p_p2 = %.5f (target 0.164 +- 0.003)", 1 - p2));
}

void oracles(Criterion& c) {
  const int n = 8;
  const double alpha = khz(-17.3), g1 = 1 / 104e-6, gphi = 1 / 205e-6 - 0.5 / 104e-6;
  Vector v = Vector::Zero(n);
  v(0) = v(2) = 1 / std::sqrt(2.0);
  const auto rho0 = QuantumState::ket(1, n, v).to_density();
  const auto grid = linspace(0, 200e-6, 41);
  EvolveOptions o;
  o.step = 2e-8;
  const auto num = evolve(kerr_model(alpha, g1, gphi, n), rho0, grid, o);
  double worst = 0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    worst = std::max(worst, (num[i].density_matrix() - analytic_kerr_evolution(alpha, g1, gphi, grid[i], n).density_matrix())
                                .cwiseAbs()
                                .maxCoeff());
  c.check(worst <= 1e-6, fmt("Kerr master equation vs analytic: max elementwise error %.2e over 0-200 us", worst));

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lg(std::log(khz(10)), std::log(mhz(2))), ratio(2.01, 60);
  std::bernoulli_distribution sign(0.5);
  double worst_rel = 0;
  for (int i = 0; i < 200; ++i) {
    const double g = std::exp(lg(rng));
    const double d = (sign(rng) ? 1 : -1) * ratio(rng) * g;
    worst_rel = std::max(worst_rel, rel(anharmonicity_from_spectrum(d, g), anharmonicity(d, g)));
  }
  c.check(worst_rel <= 1e-10, fmt("spectral vs closed-form anharmonicity: worst relative error %.2e on 200 points", worst_rel));
}

void closed_loop_ramsey(Criterion& c) {
  SequenceRunner r(DeviceParams::reference());
  const double ad = khz(100), g1 = r.params().phonon_gamma1();
  const std::vector<double> deltas = {-0.71, -0.8, -0.9, -1.0, -1.2, -1.4, -1.7, -2.0};
  std::vector<double> fitted(deltas.size());
  parallel_for(deltas.size(), [&](std::size_t i) {
    const auto rec = run_ramsey_anharmonicity(r, mhz(deltas[i]), ad, 50e-6, 101);
    fitted[i] = fit_ramsey_anharmonicity(rec, g1, ad).value("alpha");
  });
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double theory = anharmonicity(mhz(deltas[i]), kG);
    const double limit = i == 0 ? 0.02 : 0.05;
    c.check(rel(fitted[i], theory) <= limit,
            fmt("delta %.2f MHz: fitted %.4f kHz vs %.4f kHz (%.2f%%, limit %.0f%%)", deltas[i],
                units::to_khz(fitted[i]), units::to_khz(theory), 100 * rel(fitted[i], theory), 100 * limit));
  }
}

void rpn_round_trip(Criterion& c) {
  SequenceRunner r(DeviceParams::reference());
  const int dim = r.dim_fock();
  std::mt19937_64 rng(55);
  std::gamma_distribution<double> gam(1.0, 1.0);
  std::vector<std::vector<double>> truth(20);
  for (auto& p : truth) {
    p.resize(4);
    for (auto& x : p) x = gam(rng);
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& x : p) x /= s;
  }
  std::vector<MeasurementRecord> recs(truth.size());
  parallel_for(truth.size(), [&](std::size_t i) {
    Matrix rho = Matrix::Zero(dim, dim);
    for (int n = 0; n < 4; ++n) rho(n, n) = truth[i][n];
    recs[i] = run_rpn(r, QuantumState::density(1, dim, rho), 10e-6, 101);
  });
  double worst_exact = 0, worst_shots = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const FockDistribution want{truth[i]};
    worst_exact = std::max(worst_exact, rpn_fit(recs[i], r, 3).total_variation(want));
    const auto noisy = ReadoutModel{1.0, 0.0, 2000, 1000 + i}.apply(recs[i]);
    worst_shots = std::max(worst_shots, rpn_fit(noisy, r, 3).total_variation(want));
  }
  c.check(worst_exact <= 0.02, fmt("noiseless: worst total variation %.2e over 20 distributions (limit 0.02)", worst_exact));
  c.check(worst_shots <= 0.05, fmt("2000 shots/point: worst total variation %.4f (limit 0.05)", worst_shots));
}

void mechanical_rabi(Criterion& c) {
  const auto dev = DeviceParams::reference();
  SequenceRunner r(dev);
  const double tpi = M_PI / kDefaultMechanicalRabi;
  const auto s = run_mech_rabi(r, kDefaultMechanicalRabi, 0.0, {tpi}).populations[0];
  c.check(s.fock[1] >= 0.55 && s.fock[1] <= 0.65, fmt("pi pulse: P1 = %.4f (band 0.55-0.65)", s.fock[1]));
  c.check(s.fock[2] <= 0.12, fmt("pi pulse: P2 = %.4f (limit 0.12)", s.fock[2]));
  c.check(s.qubit_excited >= 0.08 && s.qubit_excited <= 0.10,
          fmt("pi pulse: dressed-qubit residual %.4f (band 0.08-0.10)", s.qubit_excited));

  // Rabi frequency versus qubit drive amplitude. The qubit amplitudes are set
  // from the dispersive estimate qd = omega / |g/delta|, so a slope of |g/delta|
  // means the dispersive scaling holds.
  RunnerOptions o;
  o.calibration = DriveCalibration::schrieffer_wolff;
  SequenceRunner sw(dev, o);
  const double eps = std::abs(dev.g / kOp);
  const std::vector<double> requested = {khz(4), khz(6), khz(8), khz(10.6)};
  std::vector<double> amp(requested.size()), freq(requested.size());
  parallel_for(requested.size(), [&](std::size_t i) {
    amp[i] = sw.qubit_drive_for(requested[i], kOp);
    const auto t = linspace(0, 2.5 * units::two_pi / requested[i], 61);
    const auto res = run_mech_rabi(sw, requested[i], 0.0, t);
    MeasurementRecord rec;
    rec.t = t;
    for (const auto& p : res.populations) rec.p_excited.push_back(1 - p.fock[0]);
    freq[i] = fit_damped_cosine(rec).value("omega");
  });
  const double n = amp.size();
  const double mx = std::accumulate(amp.begin(), amp.end(), 0.0) / n;
  const double my = std::accumulate(freq.begin(), freq.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < amp.size(); ++i) {
    sxx += (amp[i] - mx) * (amp[i] - mx);
    sxy += (amp[i] - mx) * (freq[i] - my);
    syy += (freq[i] - my) * (freq[i] - my);
  }
  const double slope = sxy / sxx, r2 = sxy * sxy / (sxx * syy);
  for (std::size_t i = 0; i < amp.size(); ++i)
    c.note(fmt("qubit drive %.2f kHz -> Rabi %.3f kHz", units::to_khz(amp[i]), units::to_khz(freq[i])));
  c.check(r2 >= 0.999, fmt("Rabi frequency linear in drive amplitude: R^2 = %.6f", r2));
  c.check(rel(slope, eps) <= 0.03,
          fmt("slope %.4f vs |g/delta| = %.4f (%.1f%%, limit 3%%); dressed mixing sin(theta) = %.4f", slope, eps,
              100 * rel(slope, eps), dressed_drive_coupling(kOp, dev.g)));
}

void t1_t2(Criterion& c) {
  SequenceRunner r(DeviceParams::reference());
  const auto grid = linspace(0, 400e-6, 101);
  MeasurementRecord t1rec, t2rec;
  parallel_for(2, [&](std::size_t i) {
    if (i == 0) t1rec = run_phonon_t1(r, grid);
    else t2rec = run_phonon_t2_ramsey(r, grid, khz(20));
  });
  const double t1 = fit_ladder_decay(t1rec).value("T1");
  const double t2 = fit_decaying_oscillation(t2rec).value("T2");
  c.check(rel(t1, 104e-6) <= 0.05, fmt("T1 fit %.2f us vs 104 us (%.1f%%)", t1 * 1e6, 100 * rel(t1, 104e-6)));
  c.check(rel(t2, 205e-6) <= 0.05, fmt("T2 fit %.2f us vs 205 us (%.1f%%)", t2 * 1e6, 100 * rel(t2, 205e-6)));
}

std::vector<WignerSample> samples(const QuantumState& s, const std::vector<cplx>& grid) {
  const auto w = wigner(s, grid);
  std::vector<WignerSample> out;
  for (std::size_t i = 0; i < grid.size(); ++i) out.push_back({grid[i], w[i]});
  return out;
}

void tomography(Criterion& c) {
  const double w0 = wigner(fock_state(1, 10), {cplx(0)})[0];
  c.check(std::abs(w0 + 2 / M_PI) <= 1e-6, fmt("W(0) of |1> = %.9f (target -2/pi)", w0));

  const auto grid = square_grid(2.5, 21);
  std::mt19937_64 rng(77);
  double worst = 1;
  for (int k = 0; k < 5; ++k) {
    Matrix rho = Matrix::Zero(10, 10);
    rho.topLeftCorner(4, 4) = random_density(rng, 4);
    const auto target = QuantumState::density(1, 10, rho);
    const auto est = mle_reconstruct(samples(target, grid), 3);
    worst = std::min(worst, fidelity(est, QuantumState::density(1, 4, rho.topLeftCorner(4, 4))));
  }
  c.check(worst >= 0.999, fmt("MLE round trip on noiseless samples: worst fidelity %.6f over 5 random states", worst));

  // End to end: prepare at the operating point, sample the phonon Wigner
  // function, reconstruct, compare to the ideal target. Bands use the squared
  // (overlap) fidelity, which for |1> is its population.
  SequenceRunner r(DeviceParams::reference());
  const CardinalPoint points[] = {CardinalPoint::one, CardinalPoint::plus, CardinalPoint::minus, CardinalPoint::plus_i,
                                  CardinalPoint::minus_i};
  std::vector<double> f(5);
  parallel_for(5, [&](std::size_t i) {
    const auto phonon = reduced_phonon(prepare_cardinal_state(r, points[i]));
    const auto est = mle_reconstruct(samples(phonon, grid), 3);
    f[i] = fidelity(est, cardinal_target(points[i], 4));
  });
  for (std::size_t i = 0; i < 5; ++i) {
    const bool one = i == 0;
    const double lo = one ? 0.53 : 0.78, hi = one ? 0.63 : 0.88;
    const double f2 = f[i] * f[i];
    c.check(f2 >= lo && f2 <= hi, fmt("%-8s fidelity %.4f (root %.4f), band %.2f-%.2f", to_string(points[i]).c_str(), f2,
                                      f[i], lo, hi));
  }
}

void properties(Criterion& c) {
  std::mt19937_64 rng(9);
  // Trace / Hermiticity / positivity under random Lindblad dynamics.
  double tr = 0, herm = 0, mineig = 1;
  for (int k = 0; k < 5; ++k) {
    const int nf = 4, d = 2 * nf;
    Matrix h = random_density(rng, d) * mhz(1.0);
    h = 0.5 * (h + h.adjoint());
    std::vector<CollapseChannel> ch{{"a", ComplexOperator(2, nf, random_density(rng, d)), 3e4},
                                    {"b", on_phonon(annihilation(nf)), 1e4}};
    LindbladModel m(ComplexOperator(2, nf, h), ch);
    for (const auto& s : evolve(m, QuantumState::density(2, nf, random_density(rng, d)), linspace(0, 2e-6, 5))) {
      const Matrix x = s.density_matrix();
      tr = std::max(tr, std::abs(s.trace() - 1));
      herm = std::max(herm, (x - x.adjoint()).cwiseAbs().maxCoeff());
      mineig = std::min(mineig, s.min_eigenvalue());
    }
  }
  c.check(tr <= 1e-9 && herm <= 1e-12 && mineig >= -1e-9,
          fmt("evolution: trace error %.1e, Hermiticity defect %.1e, min eigenvalue %.1e", tr, herm, mineig));

  // Simplex constraints of the population estimator.
  std::normal_distribution<double> nd(0, 1);
  bool simplex_ok = true;
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd v(5);
    for (auto& x : v) x = nd(rng);
    const auto p = project_to_simplex(v);
    simplex_ok = simplex_ok && std::abs(p.sum() - 1) < 1e-12 && p.minCoeff() >= 0;
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(12, 5);
    const auto q = simplex_least_squares(a, a * p + 0.01 * Eigen::VectorXd::Random(12));
    simplex_ok = simplex_ok && std::abs(q.sum() - 1) < 1e-9 && q.minCoeff() >= 0;
  }
  c.check(simplex_ok, "simplex projection and constrained least squares stay on the simplex (200 draws)");

  double asym = 0;
  bool bounded = true;
  for (int k = 0; k < 50; ++k) {
    const auto a = QuantumState::density(1, 4, random_density(rng, 4));
    const auto b = QuantumState::density(1, 4, random_density(rng, 4));
    const double fab = fidelity(a, b), fba = fidelity(b, a);
    asym = std::max(asym, std::abs(fab - fba));
    bounded = bounded && fab >= 0 && fab <= 1;
  }
  c.check(asym <= 1e-6 && bounded, fmt("fidelity symmetric (max asymmetry %.1e) and within [0, 1]", asym));

  MeasurementRecord rec;
  rec.t = linspace(0, 1, 64);
  for (double t : rec.t) rec.p_excited.push_back(0.5 + 0.4 * std::sin(9 * t));
  const auto x = ReadoutModel{1.0, 0.0, 2000, 5}.apply(rec), y = ReadoutModel{1.0, 0.0, 2000, 5}.apply(rec);
  const auto z = ReadoutModel{1.0, 0.0, 2000, 6}.apply(rec);
  c.check(x.p_excited == y.p_excited && x.p_excited != z.p_excited,
          "shot sampling is identical under a fixed seed and differs across seeds");
}

}  // namespace

int main() {
  struct Entry {
    const char* title;
    std::function<void(Criterion&)> fn;
  };
  const std::vector<Entry> entries = {
      {"anharmonicity theory", anharmonicity_theory},
      {"hybridization weights", hybridization},
      {"oracle equivalence", oracles},
      {"closed-loop Ramsey", closed_loop_ramsey},
      {"RPN round trip", rpn_round_trip},
      {"mechanical Rabi", mechanical_rabi},
      {"T1/T2 pipelines", t1_t2},
      {"tomography", tomography},
      {"property suites", properties},
  };
  int failed = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Criterion c(entries[i].title);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      entries[i].fn(c);
    } catch (const std::exception& e) {
      c.check(false, std::string("exception: ") + e.what());
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.print(static_cast<int>(i + 1), s);
    failed += c.passed() ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(entries.size()) - failed, entries.size());
  return failed == 0 ? 0 : 1;
}
