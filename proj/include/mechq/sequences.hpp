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

// Pulse-sequence IR and the experiment protocols built from it.
//
// Simulation frame: rotating at the bare phonon frequency, plus an extra frame
// offset delta_f on the excitation number N = p'p + s+s-:
//
//   H = (Delta/2) sz + g(s- p' + s+ p) - delta_f N + (Omega_q/2)(e^{-i phi} s+ + h.c.)
//
// At a working detuning the offset follows the dressed phonon frequency, so a
// drive at frequency 0 is resonant with |g0'> -> |g1'>. Swaps run at Delta = 0
// with no offset. Qubit pulses are instantaneous unless given a duration.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "mechq/device_model.hpp"
#include "mechq/dynamics.hpp"
#include "mechq/units.hpp"

namespace mechq {

/// Mechanical Rabi frequency used for direct phonon gates (2 pi x 10.6 kHz).
inline constexpr double kDefaultMechanicalRabi = units::khz(10.6);

namespace seg {

struct QubitPi {
  double phase = 0;
  double duration = 0;  // 0: ideal instantaneous rotation
};
struct QubitPiHalf {
  double phase = 0;
  double duration = 0;
};
/// Full excitation swap on the n-th rung: duration pi / (2 g sqrt(manifold)).
struct ISwap {
  int manifold = 1;
};
/// Half swap, pi / (4 g).
struct SqrtISwap {};
/// Sudden change of the working detuning. frame_offset defaults to the dressed
/// phonon frequency shift at the new detuning (0 when delta == 0).
struct StarkShift {
  double delta = 0;
  std::optional<double> frame_offset;
};
struct Wait {
  double duration = 0;
};
/// Mediated drive on the dressed phonon. amplitude is the target mechanical
/// Rabi frequency; detuning is measured from the dressed |g0'> -> |g1'> line.
struct PhononDrive {
  double amplitude = 0;
  double phase = 0;
  double duration = 0;
  double detuning = 0;
  Envelope envelope;
};
struct QubitReset {};
struct MeasureQubit {
  std::string label;
};

}  // namespace seg

using Segment = std::variant<seg::QubitPi, seg::QubitPiHalf, seg::ISwap, seg::SqrtISwap, seg::StarkShift, seg::Wait,
                             seg::PhononDrive, seg::QubitReset, seg::MeasureQubit>;

std::string segment_kind(const Segment& s);
json segment_to_json(const Segment& s);

struct PulseSequence {
  std::string id;
  std::vector<Segment> segments;

  PulseSequence& add(Segment s) {
    segments.push_back(std::move(s));
    return *this;
  }
  PulseSequence& append(const PulseSequence& other);
  void validate() const;
  json to_json() const;
};

/// How a requested mechanical Rabi frequency is turned into a qubit drive.
enum class DriveCalibration {
  dressed_exact,     // Omega_q = Omega / sin(theta), sin(theta) = sqrt(1 - p_p1)
  schrieffer_wolff,  // Omega_q = Omega / |g / Delta|
};

struct RunnerOptions {
  int dim_fock = kDefaultFockDim;
  NoiseModel noise;
  DriveCalibration calibration = DriveCalibration::dressed_exact;
  double rk4_step = 1e-9;  // only for shaped pulses / multi-tone drives
};

struct SequenceOutcome {
  QuantumState state;
  std::vector<std::pair<std::string, double>> measurements;  // label, P_e
  double final_delta = 0;
  double final_frame_offset = 0;
};

/// Executes PulseSequences against a device. Static segment propagators are
/// cached (thread-safe), so repeated runs only pay for matrix-vector products.
class SequenceRunner {
 public:
  explicit SequenceRunner(DeviceParams params, RunnerOptions options = {});

  const DeviceParams& params() const { return params_; }
  const RunnerOptions& options() const { return options_; }
  int dim_fock() const { return options_.dim_fock; }

  /// |g> (x) |0>
  QuantumState ground_state() const;
  /// |g> (x) rho_phonon for an oscillator-only state (resized to the runner's Fock dimension).
  QuantumState with_qubit_ground(const QuantumState& phonon) const;

  /// Starts at the operating detuning (params.working_delta()) unless start_delta is given.
  SequenceOutcome run(const PulseSequence& seq, const QuantumState& initial,
                      std::optional<double> start_delta = std::nullopt) const;

  /// Qubit drive amplitude producing mechanical Rabi frequency omega at delta.
  double qubit_drive_for(double omega, double delta) const;
  /// Frame offset used at a working detuning.
  double default_frame_offset(double delta) const;

  /// exp(L tau) for the static frame Hamiltonian, cached.
  const Propagator& propagator(double delta, double frame_offset, double qubit_drive, double tau) const;

  /// States after evolving for t_k (ascending, >= 0) from rho at a fixed
  /// delta / offset / phase-0 qubit drive. Uniform grids reuse one step propagator.
  std::vector<Matrix> sweep(const Matrix& rho, double delta, double frame_offset, double qubit_drive,
                            const std::vector<double>& times) const;

  Matrix apply_qubit_rotation(const Matrix& rho, double angle, double phase) const;
  Matrix apply_reset(const Matrix& rho) const;

  std::size_t cache_size() const;

 private:
  struct Frame {
    double delta;
    double offset;
  };
  Matrix apply_segment(const Segment& s, const Matrix& rho, Frame& frame, SequenceOutcome& out) const;
  Matrix shaped_qubit_pulse(const Matrix& rho, double angle, double phase, double duration, const Frame& frame) const;
  Matrix phonon_drive(const seg::PhononDrive& d, const Matrix& rho, const Frame& frame) const;
  Matrix frame_hamiltonian(double delta, double frame_offset) const;

  DeviceParams params_;
  RunnerOptions options_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::array<double, 4>, std::unique_ptr<Propagator>> cache_;
};

struct MeasurementRecord {
  std::string sequence_id;
  double delta = 0;
  std::vector<double> t;          // seconds (or the swept variable for spectra)
  std::vector<double> p_excited;  // qubit excited-state probability
  json metadata = json::object();

  void validate() const;
  CsvTable to_csv() const;  // t_s, p_excited
  json sidecar() const;
  void save(const std::filesystem::path& csv_path) const;  // also writes <csv>.json
  static MeasurementRecord load(const std::filesystem::path& csv_path);
};

struct PopulationSnapshot {
  double x = 0;  // swept variable (time or probe detuning)
  std::vector<double> fock;
  double qubit_excited = 0;
};

struct ExperimentResult {
  std::vector<MeasurementRecord> records;
  std::vector<PopulationSnapshot> populations;
  json metadata = json::object();
  std::uint64_t seed = 0;
};

/// Affine readout contrast and optional binomial shot noise.
struct ReadoutModel {
  double scale = 1.0;
  double offset = 0.0;
  std::optional<int> shots;  // nullopt: exact Born probabilities
  std::uint64_t seed = 0;

  MeasurementRecord apply(const MeasurementRecord& record) const;
};

std::vector<double> linspace(double a, double b, int n);

/// Qubit excited, then resonant interaction for t; records P_e(t). The qubit of
/// `state` must be in the ground state. An oscillator-only state is accepted.
MeasurementRecord run_rpn(const SequenceRunner& runner, const QuantumState& state, double t_max, int n_points);

/// Generation sequence (pi, sqrt-iSWAP, pi, iSWAP on the two-phonon rung), free
/// evolution at delta, then the mirror sequence with the last qubit pi pulse
/// phase-advanced by omega_ad * t.
PulseSequence ramsey_generation_sequence(double delta);
MeasurementRecord run_ramsey_anharmonicity(const SequenceRunner& runner, double delta, double omega_ad, double t_max,
                                           int n_points);

struct RpnReadout {
  bool enabled = false;
  double t_max = 10e-6;
  int n_points = 101;
};

/// Mediated phonon drive of rate omega for each duration at the operating point.
ExperimentResult run_mech_rabi(const SequenceRunner& runner, double omega_drive, double phase,
                               const std::vector<double>& t_list, const RpnReadout& rpn = {});

struct DirectPulseOptions {
  double omega_drive = kDefaultMechanicalRabi;  // mechanical Rabi frequency of the pi / pi-half pulses
  std::optional<double> far_delta;              // wait detuning; default: the bare device detuning
};

/// Direct pi pulse, wait at the far detuning, swap readout.
MeasurementRecord run_phonon_t1(const SequenceRunner& runner, const std::vector<double>& t_list,
                                const DirectPulseOptions& opts = {});
/// pi/2, wait, pi/2 phase-advanced by artificial_detuning * t, swap readout.
MeasurementRecord run_phonon_t2_ramsey(const SequenceRunner& runner, const std::vector<double>& t_list,
                                       double artificial_detuning, const DirectPulseOptions& opts = {});

struct SpectroscopyPump {
  double amplitude = 0;  // mechanical Rabi frequency of the |g0'> -> |g1'> pump
};

/// Probe detunings are measured from the dressed |g0'> -> |g1'> line. Returns
/// one population snapshot per detuning; records hold RPN traces when rpn.enabled.
ExperimentResult run_spectroscopy(const SequenceRunner& runner, double delta, const std::vector<double>& probe_detunings,
                                  double probe_duration, double probe_amplitude,
                                  std::optional<SpectroscopyPump> pump = std::nullopt, const RpnReadout& rpn = {});

enum class CardinalPoint { zero, one, plus, minus, plus_i, minus_i };
CardinalPoint cardinal_from_string(const std::string& name);
std::string to_string(CardinalPoint p);
/// Target phonon state (|0>, |1>, (|0> + e^{i phi}|1>)/sqrt2).
QuantumState cardinal_target(CardinalPoint p, int dim_fock);

/// Drive phase that rotates vacuum towards azimuth phi on the equator; the
/// phase reference is calibrated from a lossless pi/2 pulse.
double cardinal_drive_phase(const SequenceRunner& runner, double azimuth, double omega_drive);
/// Composite state after the preparation pulse at the operating point.
QuantumState prepare_cardinal_state(const SequenceRunner& runner, CardinalPoint point,
                                    double omega_drive = kDefaultMechanicalRabi);

}  // namespace mechq
