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

#include "mechq/device_model.hpp"

#include <cmath>
#include <string>

#include "mechq/error.hpp"
#include "mechq/units.hpp"

namespace mechq {

namespace {

void require_nonzero(double delta, Errc code) {
  if (delta == 0.0 || !std::isfinite(delta)) throw Error(code, "detuning must be finite and non-zero");
}

double sgn(double x) { return x > 0 ? 1.0 : -1.0; }

}  // namespace

void DeviceParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) throw Error(Errc::contract_violation, std::string(name) + " must be > 0");
  };
  if (!(g >= 0) || !std::isfinite(g)) throw Error(Errc::contract_violation, "g must be >= 0");
  if (!std::isfinite(omega_q) || !std::isfinite(omega_p))
    throw Error(Errc::contract_violation, "frequencies must be finite");
  positive(t1_q, "t1_q");
  positive(t2_q_ramsey, "t2_q_ramsey");
  positive(t2_q_echo, "t2_q_echo");
  positive(t1_p, "t1_p");
  positive(t2_p, "t2_p");
  if (t2_q_ramsey > 2 * t1_q) throw Error(Errc::contract_violation, "t2_q_ramsey exceeds 2 t1_q");
  if (t2_q_echo > 2 * t1_q) throw Error(Errc::contract_violation, "t2_q_echo exceeds 2 t1_q");
  if (t2_p > 2 * t1_p) throw Error(Errc::contract_violation, "t2_p exceeds 2 t1_p");
  if (operating_delta && !std::isfinite(*operating_delta))
    throw Error(Errc::contract_violation, "operating_delta must be finite");
}

DeviceParams DeviceParams::reference() {
  using namespace units;
  DeviceParams p;
  p.omega_q = ghz(5.057);
  p.omega_p = ghz(5.049);
  p.g = khz(280);
  p.alpha_qubit = mhz(-186);
  p.t1_q = us(23.8);
  p.t2_q_ramsey = us(20.4);
  p.t2_q_echo = us(30.9);
  p.t1_p = us(104);
  p.t2_p = us(205);
  p.operating_delta = mhz(-0.71);
  return p;
}

DeviceParams device_params_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::config_parse, "device config must be a JSON object");
  auto number = [&](const char* key) -> double {
    if (!j.contains(key)) throw Error(Errc::config_parse, std::string("missing key '") + key + "'");
    const json& v = j.at(key);
    if (!v.is_number()) throw Error(Errc::config_parse, std::string("key '") + key + "' must be a number");
    return v.get<double>();
  };
  static const char* kKnown[] = {"omega_q_hz", "omega_p_hz", "g_hz",    "alpha_qubit_hz", "t1_q_s",
                                 "t2_q_ramsey_s", "t2_q_echo_s", "t1_p_s", "t2_p_s", "operating_delta_hz"};
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : kKnown) known = known || item.key() == k;
    if (!known) throw Error(Errc::config_parse, "unknown key '" + item.key() + "'");
  }
  DeviceParams p;
  p.omega_q = units::hz(number("omega_q_hz"));
  p.omega_p = units::hz(number("omega_p_hz"));
  p.g = units::hz(number("g_hz"));
  p.alpha_qubit = units::hz(number("alpha_qubit_hz"));
  p.t1_q = number("t1_q_s");
  p.t2_q_ramsey = number("t2_q_ramsey_s");
  p.t2_q_echo = number("t2_q_echo_s");
  p.t1_p = number("t1_p_s");
  p.t2_p = number("t2_p_s");
  if (j.contains("operating_delta_hz")) p.operating_delta = units::hz(number("operating_delta_hz"));
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(Errc::config_parse, e.what());
  }
  return p;
}

json device_params_to_json(const DeviceParams& p) {
  json j{{"omega_q_hz", units::to_hz(p.omega_q)},
         {"omega_p_hz", units::to_hz(p.omega_p)},
         {"g_hz", units::to_hz(p.g)},
         {"alpha_qubit_hz", units::to_hz(p.alpha_qubit)},
         {"t1_q_s", p.t1_q},
         {"t2_q_ramsey_s", p.t2_q_ramsey},
         {"t2_q_echo_s", p.t2_q_echo},
         {"t1_p_s", p.t1_p},
         {"t2_p_s", p.t2_p}};
  if (p.operating_delta) j["operating_delta_hz"] = units::to_hz(*p.operating_delta);
  return j;
}

DeviceParams load_device_params(const std::filesystem::path& path) {
  try {
    return device_params_from_json(read_json_file(path));
  } catch (const Error& e) {
    if (e.code() == Errc::config_parse && std::string(e.what()).find(path.string()) == std::string::npos)
      throw Error(Errc::config_parse, path.string() + ": " + e.what());
    throw;
  }
}

ComplexOperator jc_hamiltonian(double delta, double g, int dim_fock) {
  const ComplexOperator p = on_phonon(annihilation(dim_fock));
  const ComplexOperator sm = on_qubit(sigma_minus(), dim_fock);
  const ComplexOperator sz = on_qubit(sigma_z(), dim_fock);
  ComplexOperator h = cplx(0.5 * delta) * sz + cplx(g) * (sm * p.adjoint() + sm.adjoint() * p);
  // Products of exact ladder entries are symmetric already; remove rounding asymmetry anyway.
  return ComplexOperator(2, dim_fock, 0.5 * (h.matrix() + h.matrix().adjoint()));
}

ComplexOperator build_jc_hamiltonian(const DeviceParams& params, Frame frame, int dim_fock) {
  if (frame == Frame::phonon_rotating) return jc_hamiltonian(params.delta(), params.g, dim_fock);
  const ComplexOperator p = on_phonon(annihilation(dim_fock));
  const ComplexOperator sm = on_qubit(sigma_minus(), dim_fock);
  const ComplexOperator sz = on_qubit(sigma_z(), dim_fock);
  ComplexOperator h = cplx(params.omega_p) * (p.adjoint() * p) + cplx(0.5 * params.omega_q) * sz +
                      cplx(params.g) * (sm.adjoint() * p + sm * p.adjoint());
  return ComplexOperator(2, dim_fock, 0.5 * (h.matrix() + h.matrix().adjoint()));
}

ComplexOperator excitation_number(int dim_fock) {
  const ComplexOperator sm = on_qubit(sigma_minus(), dim_fock);
  return on_phonon(number_operator(dim_fock)) + sm.adjoint() * sm;
}

double anharmonicity(double delta, double g) {
  require_nonzero(delta, Errc::outside_dispersive_regime);
  // Rationalized form of -delta/2 -/+ (2 sqrt(d^2+4g^2) - sqrt(d^2+8g^2))/2; avoids
  // the catastrophic cancellation between O(delta) terms at large detuning.
  const double d = std::abs(delta);
  const double a = std::sqrt(delta * delta + 4 * g * g);
  const double b = std::sqrt(delta * delta + 8 * g * g);
  const double g2 = g * g;
  return sgn(delta) * 16.0 * g2 * g2 / ((a + d) * (a + b) * (b + d));
}

double anharmonicity_dispersive(double delta, double g) {
  require_nonzero(delta, Errc::outside_dispersive_regime);
  return 2.0 * std::pow(g, 4) / std::pow(delta, 3);
}

double phonon_weight(double delta, double g, int n) {
  require_nonzero(delta, Errc::degenerate_branch);
  if (n < 0) throw Error(Errc::contract_violation, "n must be >= 0");
  if (n == 0 || g == 0) return 1.0;
  const double c = 4 * g * g * n;
  const double s = std::sqrt(delta * delta + c);
  // Mechanical branch: the eigenvector that reduces to |g n> as g -> 0.
  // (delta + s) for delta < 0 and (delta - s) for delta > 0 are both small; write
  // them as -c / (delta -/+ s) to keep precision.
  const double small = delta < 0 ? -c / (delta - s) : -c / (delta + s);
  return c / (c + small * small);
}

double dressed_energy(double delta, double g, int n) {
  require_nonzero(delta, Errc::degenerate_branch);
  if (n == 0) return -0.5 * delta;
  const double s = std::sqrt(delta * delta + 4 * g * g * n);
  return delta > 0 ? -0.5 * s : 0.5 * s;
}

std::vector<DressedLevel> dressed_levels(double delta, double g, int n_max) {
  require_nonzero(delta, Errc::degenerate_branch);
  if (n_max < 1) throw Error(Errc::contract_violation, "n_max must be >= 1");
  std::vector<DressedLevel> out;
  for (int n = 1; n <= n_max; ++n) out.push_back({n, dressed_energy(delta, g, n), phonon_weight(delta, g, n)});
  return out;
}

double dressed_frequency_shift(double delta, double g) {
  require_nonzero(delta, Errc::degenerate_branch);
  const double s = std::sqrt(delta * delta + 4 * g * g);
  // E1' - E0' = (delta +/- s)/2, rewritten without cancellation.
  return delta < 0 ? 2 * g * g / (s - delta) : -2 * g * g / (s + delta);
}

double dressed_drive_coupling(double delta, double g) {
  return std::sqrt(std::max(0.0, 1.0 - phonon_weight(delta, g, 1)));
}

double anharmonicity_from_spectrum(double delta, double g) {
  require_nonzero(delta, Errc::outside_dispersive_regime);
  if (g == 0) return 0.0;
  // Level shift of |g n'> relative to -delta/2, from its eigenvector:
  // (-delta/2) x + g sqrt(n) y = E x  =>  shift = g sqrt(n) y / x.
  auto shift = [&](int n) {
    const double gn = g * std::sqrt(static_cast<double>(n));
    Matrix h(2, 2);
    h << -0.5 * delta, gn, gn, 0.5 * delta;
    const Eigensystem es = eigh(h);
    // Mechanical branch: upper level for delta < 0, lower for delta > 0.
    const int k = delta < 0 ? 1 : 0;
    const cplx x = es.vectors(0, k);
    const cplx y = es.vectors(1, k);
    return (gn * y / x).real();
  };
  return shift(2) - 2.0 * shift(1);
}

DerivedRates coherence_budget(const DeviceParams& params, double delta) {
  require_nonzero(delta, Errc::outside_dispersive_regime);
  DerivedRates r;
  r.delta = delta;
  r.epsilon = params.g / delta;
  r.chi = 2 * params.g * params.g / delta;
  r.alpha = anharmonicity(delta, params.g);
  r.gamma2_qubit = 1.0 / params.t2_q_ramsey;
  r.Gamma2_intrinsic = 1.0 / params.t2_p;
  r.Gamma2_purcell = r.epsilon * r.epsilon * r.gamma2_qubit;
  r.Gamma2_total = r.Gamma2_intrinsic + r.Gamma2_purcell;
  r.ratio_exact = std::abs(r.alpha) / r.Gamma2_total;
  r.ratio_approx = std::abs(2 * params.g * std::pow(r.epsilon, 3)) / r.Gamma2_total;
  return r;
}

double bare_detuning_from_dressed(double delta_prime, double g) {
  const double lim = 2 * g;
  if (std::abs(delta_prime) < lim)
    throw Error(Errc::inside_avoided_crossing, "|delta'| is below 2g; no bare detuning exists");
  // (d' - 2g)(d' + 2g) keeps the boundary exactly zero.
  const double d = std::abs(delta_prime);
  return sgn(delta_prime) * std::sqrt((d - lim) * (d + lim));
}

}  // namespace mechq
