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

// Closed-form hybridization theory of a two-level qubit coupled to one phonon
// mode. Every frequency is angular (rad/s).

#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "mechq/hilbert.hpp"
#include "mechq/io.hpp"

namespace mechq {

struct DeviceParams {
  double omega_q = 0;      // qubit frequency
  double omega_p = 0;      // phonon mode frequency
  double g = 0;            // exchange coupling
  double alpha_qubit = 0;  // transmon anharmonicity (informational; qubit is two-level)
  double t1_q = 0;
  double t2_q_ramsey = 0;
  double t2_q_echo = 0;
  double t1_p = 0;
  double t2_p = 0;
  // Stark-shifted detuning where the mechanical qubit is operated.
  std::optional<double> operating_delta;

  /// Bare detuning omega_q - omega_p.
  double delta() const { return omega_q - omega_p; }
  /// operating_delta if set, otherwise delta().
  double working_delta() const { return operating_delta.value_or(delta()); }

  // Lindblad rates derived from the T values.
  double phonon_gamma1() const { return 1.0 / t1_p; }
  double phonon_gamma_phi() const { return 1.0 / t2_p - 0.5 / t1_p; }
  double qubit_gamma1() const { return 1.0 / t1_q; }
  double qubit_gamma_phi() const { return 1.0 / t2_q_ramsey - 0.5 / t1_q; }

  /// Throws Errc::contract_violation naming the offending field.
  void validate() const;

  /// The characterized device: 5.057 / 5.049 GHz, g = 280 kHz, operated at -0.71 MHz.
  static DeviceParams reference();
};

/// Keys: omega_q_hz, omega_p_hz, g_hz, alpha_qubit_hz, t1_q_s, t2_q_ramsey_s,
/// t2_q_echo_s, t1_p_s, t2_p_s, and optional operating_delta_hz.
DeviceParams device_params_from_json(const json& j);
json device_params_to_json(const DeviceParams& p);
DeviceParams load_device_params(const std::filesystem::path& path);

enum class Frame { lab, phonon_rotating };

/// Jaynes-Cummings Hamiltonian. Lab frame: wp p'p + wq/2 sz + g(s+ p + s- p').
/// Rotating frame at wp: (Delta/2) sz + g(s- p' + s+ p).
ComplexOperator build_jc_hamiltonian(const DeviceParams& params, Frame frame, int dim_fock = kDefaultFockDim);
ComplexOperator jc_hamiltonian(double delta, double g, int dim_fock = kDefaultFockDim);

/// Total excitation number p'p + s+s-; conserved by the JC Hamiltonian.
ComplexOperator excitation_number(int dim_fock);

/// Phonon Kerr anharmonicity (E2' - E1') - (E1' - E0') of the dressed
/// mechanical branch. Same sign as delta; ~ 2 g^4 / delta^3 far detuned.
double anharmonicity(double delta, double g);
/// Leading-order large-detuning form 2 g^4 / delta^3.
double anharmonicity_dispersive(double delta, double g);
/// Diagonalizes the n = 1, 2 blocks numerically and applies the level-difference
/// definition.
double anharmonicity_from_spectrum(double delta, double g);

struct DressedLevel {
  int n = 0;
  double energy = 0;         // mechanical-branch eigenenergy in the rotating frame
  double phonon_weight = 0;  // |<g n | g n'>|^2
};

/// Mechanical-branch levels for n = 1..n_max (the branch adiabatically
/// connected to |g n>).
std::vector<DressedLevel> dressed_levels(double delta, double g, int n_max);
double phonon_weight(double delta, double g, int n);
/// Energy of the dressed mechanical level |g n'> (n = 0 gives -delta/2).
double dressed_energy(double delta, double g, int n);
/// E1' - E0': the dressed phonon frequency measured from the bare mode.
double dressed_frequency_shift(double delta, double g);

/// <g1'| s+ |g0'>-type matrix element ratio: amplitude of the g0' <-> g1'
/// transition per unit qubit drive (sin of the mixing angle).
double dressed_drive_coupling(double delta, double g);

struct DerivedRates {
  double delta = 0;
  double epsilon = 0;
  double chi = 0;
  double alpha = 0;
  double gamma2_qubit = 0;
  double Gamma2_intrinsic = 0;
  double Gamma2_purcell = 0;
  double Gamma2_total = 0;
  double ratio_exact = 0;   // |alpha| / Gamma2_total
  double ratio_approx = 0;  // |2 g eps^3| / (eps^2 gamma2 + Gamma2_intrinsic)
};

/// gamma2_qubit is taken from the Ramsey T2 of the qubit.
DerivedRates coherence_budget(const DeviceParams& params, double delta);

/// Delta = sign(delta') sqrt(delta'^2 - 4 g^2).
double bare_detuning_from_dressed(double delta_prime, double g);

}  // namespace mechq
