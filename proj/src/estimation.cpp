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

#include "mechq/estimation.hpp"

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

#include "mechq/error.hpp"
#include "mechq/parallel.hpp"

namespace mechq {

namespace {

constexpr double kPi = std::numbers::pi;

void require_points(std::size_t n, std::size_t need, const char* what) {
  if (n < need)
    throw Error(Errc::under_determined, std::string(what) + " needs at least " + std::to_string(need) + " points");
}

// Residual functor in scaled coordinates u = x / scale.
struct ScaledResidual {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> residual;
  Eigen::VectorXd scale;
  int n_values = 0;

  int inputs() const { return static_cast<int>(scale.size()); }
  int values() const { return n_values; }
  int operator()(const Eigen::VectorXd& u, Eigen::VectorXd& fvec) const {
    residual(u.cwiseProduct(scale), fvec);
    return 0;
  }
};

struct LmOutcome {
  Eigen::VectorXd x;
  Eigen::MatrixXd jacobian;  // d residual / d x
  int iterations = 0;
  bool converged = false;
  int status = 0;
};

LmOutcome levenberg_marquardt(const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& residual,
                              int n_values, const Eigen::VectorXd& x0, int max_iterations, double tol) {
  ScaledResidual f{residual, x0.cwiseAbs(), n_values};
  for (Eigen::Index i = 0; i < f.scale.size(); ++i)
    if (f.scale(i) == 0 || !std::isfinite(f.scale(i))) f.scale(i) = 1.0;
  Eigen::NumericalDiff<ScaledResidual, Eigen::Central> nd(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<ScaledResidual, Eigen::Central>> lm(nd);
  lm.parameters.maxfev = max_iterations * static_cast<int>(x0.size() + 1);
  lm.parameters.ftol = tol;
  lm.parameters.xtol = tol;
  Eigen::VectorXd u = x0.cwiseQuotient(f.scale);
  const auto status = lm.minimize(u);
  LmOutcome out;
  out.status = static_cast<int>(status);
  out.x = u.cwiseProduct(f.scale);
  out.iterations = static_cast<int>(lm.iter);
  using S = Eigen::LevenbergMarquardtSpace::Status;
  out.converged = status != S::ImproperInputParameters && status != S::TooManyFunctionEvaluation &&
                  status != S::NotStarted && status != S::Running && status != S::UserAsked;
  Eigen::MatrixXd ju(n_values, x0.size());
  nd.df(u, ju);
  out.jacobian = ju * f.scale.cwiseInverse().asDiagonal();
  return out;
}

std::vector<double> residuals_of(const CurveModel& m, const std::vector<double>& x, const std::vector<double>& y,
                                 const Eigen::VectorXd& p) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = m.f(x[i], p) - y[i];
  return r;
}

double rss_of(const CurveModel& m, const std::vector<double>& x, const std::vector<double>& y,
              const Eigen::VectorXd& p) {
  double s = 0;
  for (double r : residuals_of(m, x, y, p)) s += r * r;
  return s;
}

bool uniform_grid(const std::vector<double>& t, double& dt) {
  if (t.size() < 2) return false;
  dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  if (!(dt > 0)) return false;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (std::abs(t[i] - (t.front() + dt * static_cast<double>(i))) > 1e-6 * dt) return false;
  return true;
}

double time_span(const std::vector<double>& t) { return t.back() - t.front(); }

}  // namespace

// ---------------------------------------------------------------------------

void FockDistribution::validate() const {
  double sum = 0;
  for (double p : populations) {
    if (!(p >= 0 && p <= 1)) throw Error(Errc::contract_violation, "population outside [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1) > 1e-9) throw Error(Errc::contract_violation, "populations sum to " + std::to_string(sum));
}

double FockDistribution::total_variation(const FockDistribution& other) const {
  const std::size_t n = std::max(populations.size(), other.populations.size());
  double s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i < populations.size() ? populations[i] : 0.0;
    const double b = i < other.populations.size() ? other.populations[i] : 0.0;
    s += std::abs(a - b);
  }
  return 0.5 * s;
}

json FockDistribution::to_json() const { return json{{"populations", populations}}; }

double FitResult::value(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p.value;
  throw Error(Errc::contract_violation, "fit has no parameter '" + name + "'");
}

double FitResult::stderr_of(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p.stderr_;
  throw Error(Errc::contract_violation, "fit has no parameter '" + name + "'");
}

json FitResult::to_json() const {
  json params = json::array();
  for (const auto& p : parameters)
    params.push_back({{"name", p.name}, {"value", p.value}, {"unit", p.unit}, {"stderr", p.stderr_}});
  json j{{"model", model}, {"parameters", params}, {"rss", residual_rss}, {"iterations", iterations}};
  if (covariance) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < covariance->rows(); ++r) {
      std::vector<double> row(covariance->cols());
      for (Eigen::Index c = 0; c < covariance->cols(); ++c) row[c] = (*covariance)(r, c);
      rows.push_back(row);
    }
    j["covariance"] = rows;
  }
  return j;
}

FitResult curve_fit(const CurveModel& model, const std::vector<double>& x, const std::vector<double>& y,
                    const Eigen::VectorXd& initial, const FitOptions& options) {
  if (x.size() != y.size()) throw Error(Errc::dimension_mismatch, "x and y lengths differ");
  const int m = static_cast<int>(x.size());
  const int k = static_cast<int>(initial.size());
  if (m < k) throw Error(Errc::under_determined, model.name + ": fewer points than parameters");
  auto residual = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r) {
    for (int i = 0; i < m; ++i) r(i) = model.f(x[i], p) - y[i];
  };
  const LmOutcome lm = levenberg_marquardt(residual, m, initial, options.max_iterations, options.tolerance);
  const double rss = rss_of(model, x, y, lm.x);
  if (!lm.converged || !lm.x.allFinite() || !std::isfinite(rss)) {
    std::ostringstream ss;
    ss << model.name << ": did not converge (status " << lm.status << ", rss " << rss << ")";
    throw Error(Errc::fit_failure, ss.str());
  }
  FitResult fr;
  fr.model = model.name;
  fr.residual_rss = rss;
  fr.iterations = lm.iterations;
  const Eigen::MatrixXd jtj = lm.jacobian.transpose() * lm.jacobian;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(jtj);
  const double s2 = m > k ? rss / (m - k) : 0.0;
  Eigen::MatrixXd cov = cod.pseudoInverse() * s2;
  fr.covariance = cov;
  for (int i = 0; i < k; ++i) {
    FitParameter p;
    p.name = model.parameter_names.at(i);
    p.unit = i < static_cast<int>(model.parameter_units.size()) ? model.parameter_units[i] : "";
    p.value = lm.x(i);
    p.stderr_ = std::sqrt(std::max(0.0, cov(i, i)));
    fr.parameters.push_back(p);
  }
  return fr;
}

double dominant_frequency(const std::vector<double>& t, const std::vector<double>& y) {
  require_points(t.size(), 4, "frequency estimate");
  double dt = 0;
  if (!uniform_grid(t, dt)) throw Error(Errc::fit_initialization, "frequency estimate needs a uniform grid");
  const std::size_t n = y.size();
  double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);
  const std::size_t padded = 8 * n;
  const std::size_t kmax = padded / 2;
  std::vector<double> power(kmax + 1, 0.0);
  for (std::size_t k = 1; k <= kmax; ++k) {
    const double w = 2 * kPi * static_cast<double>(k) / static_cast<double>(padded);
    cplx acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += (y[i] - mean) * std::polar(1.0, -w * static_cast<double>(i));
    power[k] = std::norm(acc);
  }
  // Skip the leakage lobe of the DC term so a decaying baseline is not read as a tone.
  const std::size_t kstart = 8;
  std::size_t best = kstart;
  for (std::size_t k = kstart; k <= kmax; ++k)
    if (power[k] > power[best]) best = k;
  std::vector<double> sorted(power.begin() + kstart, power.end());
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  if (!(power[best] > 0) || power[best] < 10 * median)
    throw Error(Errc::fit_initialization, "no significant spectral peak in the record");
  // Parabolic refinement on log power.
  double shift = 0;
  if (best > kstart && best < kmax) {
    const double a = std::log(power[best - 1] + 1e-300), b = std::log(power[best]), c = std::log(power[best + 1] + 1e-300);
    const double den = a - 2 * b + c;
    if (den < 0) shift = std::clamp(0.5 * (a - c) / den, -0.5, 0.5);
  }
  return 2 * kPi * (static_cast<double>(best) + shift) / (static_cast<double>(padded) * dt);
}

double ramsey_model(double t, double omega, double gamma1, double gamma_phi) {
  const double c = std::cos(kPi / (2 * std::sqrt(2.0)));
  const double f = 1 - 2 * c * c * c * c;
  return 0.5 * (1 + f * (std::exp(-2 * gamma1 * t) - std::exp(-gamma1 * t)) +
                std::exp(-(gamma1 + 4 * gamma_phi) * t) * std::cos(omega * t));
}

FitResult fit_ramsey_anharmonicity(const MeasurementRecord& record, double gamma1, double omega_ad, double alpha_sign) {
  record.validate();
  require_points(record.t.size(), 4, "ramsey fit");
  const auto& t = record.t;
  const auto& y = record.p_excited;
  const double w0 = dominant_frequency(t, y);
  const double span = time_span(t);
  double dt = span / static_cast<double>(t.size() - 1);
  if (w0 >= kPi / dt) throw Error(Errc::fit_initialization, "oscillation is not resolved by the sampling grid");

  CurveModel model{"ramsey_anharmonicity",
                   {"omega", "gamma_phi"},
                   {"rad/s", "1/s"},
                   [gamma1](double x, const Eigen::VectorXd& p) { return ramsey_model(x, p(0), gamma1, p(1)); }};
  // Coarse scan around the periodogram peak before the local solver.
  const double bin = 2 * kPi / span;
  Eigen::VectorXd best(2);
  double best_rss = INFINITY;
  for (int i = -15; i <= 15; ++i) {
    for (double gp : {0.0, 0.1 / span, 0.5 / span, 2.0 / span}) {
      Eigen::VectorXd p(2);
      p << std::max(1e-3 * bin, w0 + 0.1 * i * bin), gp;
      const double r = rss_of(model, t, y, p);
      if (r < best_rss) {
        best_rss = r;
        best = p;
      }
    }
  }
  if (best(1) == 0) best(1) = 1e-3 / span;
  FitResult fr = curve_fit(model, t, y, best);
  const double omega = std::abs(fr.value("omega"));
  fr.parameters[0].value = omega;
  const double alpha = omega_ad != 0 ? omega - 2 * omega_ad : (alpha_sign < 0 ? -omega : omega);
  fr.parameters.insert(fr.parameters.begin(), FitParameter{"alpha", alpha, "rad/s", fr.stderr_of("omega")});
  fr.parameters.push_back({"gamma1", gamma1, "1/s", 0.0});
  fr.parameters.push_back({"omega_ad", omega_ad, "rad/s", 0.0});
  return fr;
}

FitResult fit_damped_cosine(const MeasurementRecord& record) {
  record.validate();
  require_points(record.t.size(), 8, "damped cosine fit");
  const auto& t = record.t;
  const auto& y = record.p_excited;
  CurveModel model{"damped_cosine",
                   {"A", "kappa", "omega", "phi"},
                   {"", "1/s", "rad/s", "rad"},
                   [](double x, const Eigen::VectorXd& p) {
                     return p(0) * (1 - std::exp(-p(1) * x) * std::cos(p(2) * x + p(3)));
                   }};
  double mean = 0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  const double w0 = dominant_frequency(t, y);
  const double span = time_span(t);
  Eigen::VectorXd best(4);
  double best_rss = INFINITY;
  for (int i = -10; i <= 10; ++i)
    for (int k = 0; k < 16; ++k)
      for (double kap : {0.0, 0.3 / span, 1.0 / span, 3.0 / span}) {
        Eigen::VectorXd p(4);
        p << mean, kap, w0 * (1 + 0.01 * i), 2 * kPi * k / 16.0 - kPi;
        const double r = rss_of(model, t, y, p);
        if (r < best_rss) {
          best_rss = r;
          best = p;
        }
      }
  if (best(1) == 0) best(1) = 1e-3 / span;
  if (best(3) == 0) best(3) = 1e-3;
  return curve_fit(model, t, y, best);
}

FitResult fit_exponential(const MeasurementRecord& record) {
  record.validate();
  require_points(record.t.size(), 8, "exponential fit");
  const auto& t = record.t;
  const auto& y = record.p_excited;
  CurveModel model{"exponential",
                   {"A", "T1", "c"},
                   {"", "s", ""},
                   [](double x, const Eigen::VectorXd& p) { return p(0) * std::exp(-x / p(1)) + p(2); }};
  const double c0 = y.back();
  const double a0 = y.front() - c0;
  double tau = time_span(t) / 3;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (std::abs(y[i] - c0) < std::abs(a0) / std::numbers::e) {
      tau = std::max(t[i] - t.front(), 1e-3 * time_span(t));
      break;
    }
  Eigen::VectorXd p0(3);
  p0 << (a0 == 0 ? 1e-3 : a0), tau, (c0 == 0 ? 1e-3 : c0);
  return curve_fit(model, t, y, p0);
}

FitResult fit_ladder_decay(const MeasurementRecord& record) {
  const FitResult single = fit_exponential(record);
  const auto& t = record.t;
  const auto& y = record.p_excited;
  CurveModel model{"ladder_decay",
                   {"A", "B", "T1", "c"},
                   {"", "", "s", ""},
                   [](double x, const Eigen::VectorXd& p) {
                     return p(0) * std::exp(-x / p(2)) + p(1) * std::exp(-2 * x / p(2)) + p(3);
                   }};
  Eigen::VectorXd p0(4);
  p0 << single.value("A"), 0.05 * single.value("A"), single.value("T1"), single.value("c");
  if (p0(3) == 0) p0(3) = 1e-3;
  return curve_fit(model, t, y, p0);
}

FitResult fit_decaying_oscillation(const MeasurementRecord& record) {
  record.validate();
  require_points(record.t.size(), 8, "decaying oscillation fit");
  const auto& t = record.t;
  const auto& y = record.p_excited;
  CurveModel model{"decaying_oscillation",
                   {"c", "A", "T2", "omega", "phi"},
                   {"", "", "s", "rad/s", "rad"},
                   [](double x, const Eigen::VectorXd& p) {
                     return p(0) + p(1) * std::exp(-x / p(2)) * std::cos(p(3) * x + p(4));
                   }};
  double mean = 0, lo = y.front(), hi = y.front();
  for (double v : y) {
    mean += v;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  mean /= static_cast<double>(y.size());
  const double w0 = dominant_frequency(t, y);
  const double span = time_span(t);
  Eigen::VectorXd best(5);
  double best_rss = INFINITY;
  for (int i = -10; i <= 10; ++i)
    for (int k = 0; k < 16; ++k)
      for (double tt : {0.3 * span, span, 3 * span}) {
        Eigen::VectorXd p(5);
        p << mean, 0.5 * (hi - lo), tt, w0 * (1 + 0.01 * i), 2 * kPi * k / 16.0 - kPi;
        const double r = rss_of(model, t, y, p);
        if (r < best_rss) {
          best_rss = r;
          best = p;
        }
      }
  if (best(4) == 0) best(4) = 1e-3;
  return curve_fit(model, t, y, best);
}

FitResult fit_lorentzian(const std::vector<std::pair<double, double>>& points_in) {
  require_points(points_in.size(), 8, "lorentzian fit");
  auto points = points_in;
  std::sort(points.begin(), points.end());
  std::vector<double> x, y;
  for (const auto& [a, b] : points) {
    x.push_back(a);
    y.push_back(b);
  }
  CurveModel model{"lorentzian",
                   {"A", "delta0", "Gamma", "c"},
                   {"", "rad/s", "rad/s", ""},
                   [](double d, const Eigen::VectorXd& p) {
                     const double h = 0.5 * p(2);
                     return p(0) * h * h / ((d - p(1)) * (d - p(1)) + h * h) + p(3);
                   }};
  const auto imax = static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  const double lo = *std::min_element(y.begin(), y.end());
  const double half = 0.5 * (y[imax] + lo);
  double left = x[imax], right = x[imax];
  for (std::size_t i = 0; i < x.size(); ++i)
    if (y[i] >= half) {
      left = std::min(left, x[i]);
      right = std::max(right, x[i]);
    }
  const double step = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  Eigen::VectorXd p0(4);
  p0 << y[imax] - lo, x[imax], std::max(right - left, step), lo == 0 ? 1e-6 : lo;
  if (p0(1) == 0) p0(1) = 1e-3 * step;
  FitResult fr = curve_fit(model, x, y, p0);
  fr.parameters[2].value = std::abs(fr.parameters[2].value);
  return fr;
}

// ---------------------------------------------------------------------------

RpnBasis::RpnBasis(const SequenceRunner& runner, const std::vector<double>& t, int n_max) : t_(t), n_max_(n_max) {
  if (n_max < 0 || n_max > runner.dim_fock() - 2)
    throw Error(Errc::contract_violation, "n_max must be within 0..dim_fock-2");
  double dt = 0;
  if (!uniform_grid(t, dt) || std::abs(t.front()) > 1e-15)
    throw Error(Errc::contract_violation, "rpn basis needs a uniform grid starting at 0");
  basis_.resize(static_cast<Eigen::Index>(t.size()), n_max + 1);
  std::vector<MeasurementRecord> recs(n_max + 1);
  parallel_for(recs.size(), [&](std::size_t n) {
    recs[n] = run_rpn(runner, fock_state(static_cast<int>(n), runner.dim_fock()), t.back(), static_cast<int>(t.size()));
  });
  for (int n = 0; n <= n_max; ++n)
    for (std::size_t i = 0; i < t.size(); ++i) basis_(static_cast<Eigen::Index>(i), n) = recs[n].p_excited[i];
}

std::shared_ptr<const RpnBasis> RpnBasis::cached(const SequenceRunner& runner, const std::vector<double>& t,
                                                 int n_max) {
  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<const RpnBasis>> cache;
  const auto& p = runner.params();
  const auto& nz = runner.options().noise;
  std::ostringstream key;
  key.precision(17);
  key << p.g << '|' << p.t1_p << '|' << p.t2_p << '|' << p.t1_q << '|' << p.t2_q_ramsey << '|' << nz.phonon
      << nz.qubit_relaxation << nz.qubit_dephasing << static_cast<int>(nz.dephasing_kind) << '|' << runner.dim_fock()
      << '|' << n_max << '|' << t.size() << '|' << (t.empty() ? 0.0 : t.front()) << '|'
      << (t.empty() ? 0.0 : t.back());
  {
    std::lock_guard lock(mutex);
    auto it = cache.find(key.str());
    if (it != cache.end()) return it->second;
  }
  auto basis = std::make_shared<const RpnBasis>(runner, t, n_max);
  std::lock_guard lock(mutex);
  return cache.emplace(key.str(), basis).first->second;
}

double RpnBasis::condition_number() const {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis_);
  const auto& s = svd.singularValues();
  // Fewer samples than populations: the columns cannot be independent.
  if (basis_.rows() < basis_.cols()) return INFINITY;
  if (s.size() == 0 || s(s.size() - 1) <= 0) return INFINITY;
  return s(0) / s(s.size() - 1);
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0, theta = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1) / static_cast<double>(j + 1);
    if (u[j] - t > 0) theta = t;
  }
  Eigen::VectorXd out = (v.array() - theta).max(0.0);
  return out / out.sum();
}

Eigen::VectorXd simplex_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index k = a.cols();
  if (k == 0) throw Error(Errc::invalid_dimension, "empty basis");
  const Eigen::MatrixXd q = a.transpose() * a;
  const Eigen::VectorXd c = a.transpose() * b;
  auto objective = [&](const Eigen::VectorXd& p) { return (a * p - b).squaredNorm(); };
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q, Eigen::EigenvaluesOnly);
  const double lip = std::max(es.eigenvalues().maxCoeff(), 1e-300);

  // FISTA on the simplex.
  Eigen::VectorXd x = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  Eigen::VectorXd yv = x;
  double tk = 1;
  for (int it = 0; it < 50000; ++it) {
    const Eigen::VectorXd xn = project_to_simplex(yv - (q * yv - c) / lip);
    const double tn = 0.5 * (1 + std::sqrt(1 + 4 * tk * tk));
    yv = xn + ((tk - 1) / tn) * (xn - x);
    const double move = (xn - x).lpNorm<Eigen::Infinity>();
    x = xn;
    tk = tn;
    if (move < 1e-15) break;
  }

  // Active-set polish: equality-constrained solve on the support, accepted when
  // it is feasible, satisfies the KKT sign conditions and does not raise the objective.
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < k; ++i)
    if (x(i) > 1e-9) support.push_back(i);
  if (!support.empty()) {
    const auto s = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(s + 1, s + 1);
    Eigen::VectorXd rhs(s + 1);
    for (Eigen::Index i = 0; i < s; ++i) {
      for (Eigen::Index j = 0; j < s; ++j) kkt(i, j) = q(support[i], support[j]);
      kkt(i, s) = 1;
      kkt(s, i) = 1;
      rhs(i) = c(support[i]);
    }
    rhs(s) = 1;
    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(k);
    bool feasible = sol.allFinite();
    for (Eigen::Index i = 0; i < s && feasible; ++i) {
      if (sol(i) < -1e-12) feasible = false;
      p(support[i]) = std::max(0.0, sol(i));
    }
    if (feasible) {
      const double mu = sol(s);
      const Eigen::VectorXd grad = q * p - c;
      for (Eigen::Index i = 0; i < k; ++i)
        if (p(i) == 0 && grad(i) + mu < -1e-9 * std::max(1.0, c.cwiseAbs().maxCoeff())) feasible = false;
      p /= p.sum();
      if (feasible && objective(p) <= objective(x) + 1e-14) x = p;
    }
  }
  return project_to_simplex(x);
}

FockDistribution rpn_fit(const MeasurementRecord& record, const RpnBasis& basis, const RpnFitOptions& options) {
  record.validate();
  if (record.t.size() != basis.t().size()) throw Error(Errc::dimension_mismatch, "record and basis grids differ");
  for (std::size_t i = 0; i < record.t.size(); ++i)
    if (std::abs(record.t[i] - basis.t()[i]) > 1e-12 * std::max(1.0, std::abs(basis.t()[i])) + 1e-15)
      throw Error(Errc::dimension_mismatch, "record and basis grids differ");
  const double cond = basis.condition_number();
  if (!(cond <= options.max_condition)) {
    std::ostringstream ss;
    ss << "basis condition number " << cond << " exceeds " << options.max_condition;
    throw Error(Errc::ill_conditioned_basis, ss.str());
  }
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(record.p_excited.data(),
                                                              static_cast<Eigen::Index>(record.p_excited.size()));
  const Eigen::VectorXd p = simplex_least_squares(basis.matrix(), b);
  FockDistribution out{std::vector<double>(p.data(), p.data() + p.size())};
  out.validate();
  return out;
}

FockDistribution rpn_fit(const MeasurementRecord& record, const SequenceRunner& runner, int n_max,
                         const RpnFitOptions& options) {
  double dt = 0;
  if (!uniform_grid(record.t, dt)) throw Error(Errc::contract_violation, "rpn_fit needs a uniform time grid");
  return rpn_fit(record, *RpnBasis::cached(runner, record.t, n_max), options);
}

// ---------------------------------------------------------------------------

namespace {

// Generalized Laguerre L_m^{(k)}(x) for m = 0..mmax.
void laguerre_row(int mmax, int k, double x, std::vector<double>& out) {
  out.assign(mmax + 1, 0.0);
  out[0] = 1.0;
  if (mmax >= 1) out[1] = 1.0 + k - x;
  for (int j = 1; j < mmax; ++j) out[j + 1] = ((2 * j + 1 + k - x) * out[j] - (j + k) * out[j - 1]) / (j + 1);
}

// Real linear functional on rho for the Wigner value at beta: W = (2/pi) sum Re(rho_mn K_mn).
Matrix wigner_kernel(int d, cplx beta) {
  const double x = 4 * std::norm(beta);
  const double pref = (2 / kPi) * std::exp(-0.5 * x);
  Matrix kern = Matrix::Zero(d, d);
  std::vector<double> lag;
  for (int k = 0; k < d; ++k) {
    laguerre_row(d - 1 - k, k, x, lag);
    const cplx zk = std::pow(2.0 * beta, k);
    for (int m = 0; m + k < d; ++m) {
      const int n = m + k;
      const double sign = (m % 2 == 0) ? 1.0 : -1.0;
      const double ratio = std::exp(0.5 * (std::lgamma(m + 1.0) - std::lgamma(n + 1.0)));
      const cplx term = pref * sign * ratio * lag[m] * zk;
      kern(m, n) = k == 0 ? term : 2.0 * term;
    }
  }
  return kern;
}

double apply_kernel(const Matrix& kern, const Matrix& rho) {
  double w = 0;
  for (Eigen::Index m = 0; m < kern.rows(); ++m)
    for (Eigen::Index n = m; n < kern.cols(); ++n) w += (rho(m, n) * kern(m, n)).real();
  return w;
}

}  // namespace

std::vector<double> wigner(const QuantumState& rho_state, const std::vector<cplx>& grid) {
  if (rho_state.dim_qubit() != 1)
    throw Error(Errc::contract_violation, "wigner expects a reduced phonon state (trace out the qubit first)");
  const Matrix rho = rho_state.density_matrix();
  const int d = static_cast<int>(rho.rows());
  if (d >= 3) {
    const double top = rho(d - 1, d - 1).real() + rho(d - 2, d - 2).real();
    if (top > 1e-4) warn("wigner: top two Fock levels hold population " + std::to_string(top) + " (truncation)");
  }
  for (const auto& b : grid)
    if (!std::isfinite(b.real()) || !std::isfinite(b.imag()))
      throw Error(Errc::contract_violation, "wigner grid must be finite");
  std::vector<double> out(grid.size());
  const std::size_t chunk = 64;
  const std::size_t chunks = (grid.size() + chunk - 1) / chunk;
  parallel_for(chunks, [&](std::size_t c) {
    for (std::size_t i = c * chunk; i < std::min(grid.size(), (c + 1) * chunk); ++i)
      out[i] = apply_kernel(wigner_kernel(d, grid[i]), rho);
  });
  return out;
}

std::vector<cplx> square_grid(double extent, int n) {
  if (n < 1 || !(extent > 0)) throw Error(Errc::contract_violation, "grid needs n >= 1 and extent > 0");
  const auto axis = linspace(-extent, extent, n);
  std::vector<cplx> grid;
  grid.reserve(static_cast<std::size_t>(n) * n);
  for (double re : axis)
    for (double im : axis) grid.emplace_back(re, im);
  return grid;
}

QuantumState mle_reconstruct(const std::vector<WignerSample>& samples, int n_max, const MleOptions& options) {
  if (n_max < 1) throw Error(Errc::contract_violation, "n_max must be >= 1");
  const int d = n_max + 1;
  const int npar = d * d;
  if (static_cast<int>(samples.size()) < npar)
    throw Error(Errc::under_determined, "need at least " + std::to_string(npar) + " samples for n_max " +
                                            std::to_string(n_max) + ", got " + std::to_string(samples.size()));
  // Real design matrix on h = [rho_mm, Re rho_mn, Im rho_mn (m < n)].
  const int ns = static_cast<int>(samples.size());
  Eigen::MatrixXd design(ns, npar);
  Eigen::VectorXd w(ns);
  for (int s = 0; s < ns; ++s) {
    const Matrix kern = wigner_kernel(d, samples[s].beta);
    w(s) = samples[s].value;
    int col = 0;
    for (int m = 0; m < d; ++m) design(s, col++) = kern(m, m).real();
    for (int m = 0; m < d; ++m)
      for (int n = m + 1; n < d; ++n) {
        design(s, col++) = kern(m, n).real();
        design(s, col++) = -kern(m, n).imag();
      }
  }
  auto to_h = [&](const Matrix& rho) {
    Eigen::VectorXd h(npar);
    int col = 0;
    for (int m = 0; m < d; ++m) h(col++) = rho(m, m).real();
    for (int m = 0; m < d; ++m)
      for (int n = m + 1; n < d; ++n) {
        h(col++) = rho(m, n).real();
        h(col++) = rho(m, n).imag();
      }
    return h;
  };
  // T lower triangular: diagonal real, strictly-lower complex.
  auto theta_to_rho = [&](const Eigen::VectorXd& th) {
    Matrix tm = Matrix::Zero(d, d);
    int col = 0;
    for (int i = 0; i < d; ++i) tm(i, i) = th(col++);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < i; ++j) {
        tm(i, j) = cplx(th(col), th(col + 1));
        col += 2;
      }
    Matrix rho = tm.adjoint() * tm;
    const double tr = rho.trace().real();
    return Matrix(rho / (tr > 0 ? tr : 1.0));
  };

  // Start: linear inversion projected onto the physical set.
  const Eigen::VectorXd h_lin = design.colPivHouseholderQr().solve(w);
  Matrix rho0 = Matrix::Zero(d, d);
  {
    int col = 0;
    for (int m = 0; m < d; ++m) rho0(m, m) = h_lin(col++);
    for (int m = 0; m < d; ++m)
      for (int n = m + 1; n < d; ++n) {
        rho0(m, n) = cplx(h_lin(col), h_lin(col + 1));
        rho0(n, m) = std::conj(rho0(m, n));
        col += 2;
      }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho0);
  const Eigen::VectorXd lam = project_to_simplex(es.eigenvalues());
  rho0 = es.eigenvectors() * (lam.array() + 1e-6).matrix().asDiagonal() * es.eigenvectors().adjoint();
  rho0 /= rho0.trace().real();
  // rho = U U' with U upper triangular via Cholesky of the index-reversed matrix; T = U'.
  Matrix rev(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) rev(i, j) = rho0(d - 1 - i, d - 1 - j);
  const Matrix l = rev.llt().matrixL();
  Matrix u(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) u(i, j) = l(d - 1 - i, d - 1 - j);
  const Matrix tm = u.adjoint();
  Eigen::VectorXd theta(npar);
  {
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> jitter(0.0, 1e-6);
    int col = 0;
    for (int i = 0; i < d; ++i) theta(col++) = tm(i, i).real() + jitter(rng);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < i; ++j) {
        theta(col++) = tm(i, j).real() + jitter(rng);
        theta(col++) = tm(i, j).imag() + jitter(rng);
      }
  }
  auto residual = [&](const Eigen::VectorXd& th, Eigen::VectorXd& r) { r = design * to_h(theta_to_rho(th)) - w; };
  const LmOutcome lm = levenberg_marquardt(residual, ns, theta, options.max_iterations, options.tolerance);
  if (!lm.x.allFinite()) throw Error(Errc::fit_failure, "maximum-likelihood reconstruction diverged");
  Matrix rho = theta_to_rho(lm.x);
  rho = 0.5 * (rho + rho.adjoint());
  rho /= rho.trace().real();
  return QuantumState::density_unchecked(1, d, std::move(rho));
}

double fidelity(const QuantumState& a, const QuantumState& b) {
  if (a.dim_qubit() != b.dim_qubit() || a.dim_fock() != b.dim_fock())
    throw Error(Errc::dimension_mismatch, "fidelity: states have different dimensions");
  const Matrix rho = a.density_matrix();
  const Matrix sigma = b.density_matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  const Eigen::VectorXd s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Matrix sq = es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
  Matrix m = sq * sigma * sq;
  Eigen::SelfAdjointEigenSolver<Matrix> em(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  const double f = em.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(f, 0.0, 1.0);
}

}  // namespace mechq
