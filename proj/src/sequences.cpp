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

#include "mechq/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mechq/error.hpp"
#include "mechq/parallel.hpp"

namespace mechq {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double excited_population(const Matrix& rho, int dim_fock) {
  return rho.diagonal().tail(dim_fock).real().sum();
}

bool is_uniform(const std::vector<double>& t, double& dt) {
  if (t.size() < 2) return false;
  dt = t[1] - t[0];
  if (!(dt > 0)) return false;
  const double start = t[0];
  for (std::size_t i = 0; i < t.size(); ++i)
    if (std::abs(t[i] - (start + dt * static_cast<double>(i))) > 1e-9 * std::max(dt, std::abs(t[i]))) return false;
  return true;
}

}  // namespace

std::string segment_kind(const Segment& s) {
  return std::visit(overloaded{[](const seg::QubitPi&) { return std::string("qubit_pi"); },
                               [](const seg::QubitPiHalf&) { return std::string("qubit_pi_half"); },
                               [](const seg::ISwap&) { return std::string("iswap"); },
                               [](const seg::SqrtISwap&) { return std::string("sqrt_iswap"); },
                               [](const seg::StarkShift&) { return std::string("stark_shift"); },
                               [](const seg::Wait&) { return std::string("wait"); },
                               [](const seg::PhononDrive&) { return std::string("phonon_drive"); },
                               [](const seg::QubitReset&) { return std::string("qubit_reset"); },
                               [](const seg::MeasureQubit&) { return std::string("measure_qubit"); }},
                    s);
}

json segment_to_json(const Segment& s) {
  json j{{"kind", segment_kind(s)}};
  std::visit(overloaded{[&](const seg::QubitPi& x) {
                          j["phase"] = x.phase;
                          j["duration_s"] = x.duration;
                        },
                        [&](const seg::QubitPiHalf& x) {
                          j["phase"] = x.phase;
                          j["duration_s"] = x.duration;
                        },
                        [&](const seg::ISwap& x) { j["manifold"] = x.manifold; },
                        [&](const seg::SqrtISwap&) {},
                        [&](const seg::StarkShift& x) {
                          j["delta_hz"] = units::to_hz(x.delta);
                          if (x.frame_offset) j["frame_offset_hz"] = units::to_hz(*x.frame_offset);
                        },
                        [&](const seg::Wait& x) { j["duration_s"] = x.duration; },
                        [&](const seg::PhononDrive& x) {
                          j["amplitude_hz"] = units::to_hz(x.amplitude);
                          j["phase"] = x.phase;
                          j["duration_s"] = x.duration;
                          j["detuning_hz"] = units::to_hz(x.detuning);
                          j["envelope"] = x.envelope.kind == EnvelopeKind::gaussian ? "gaussian" : "rectangular";
                          if (x.envelope.kind == EnvelopeKind::gaussian) j["sigma_s"] = x.envelope.sigma;
                        },
                        [&](const seg::QubitReset&) {},
                        [&](const seg::MeasureQubit& x) { j["label"] = x.label; }},
             s);
  return j;
}

PulseSequence& PulseSequence::append(const PulseSequence& other) {
  segments.insert(segments.end(), other.segments.begin(), other.segments.end());
  return *this;
}

void PulseSequence::validate() const {
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const std::string where = "segment " + std::to_string(i) + " (" + segment_kind(segments[i]) + ")";
    std::visit(overloaded{[&](const seg::QubitPi& x) {
                            if (!(x.duration >= 0)) throw Error(Errc::contract_violation, where + ": negative duration");
                          },
                          [&](const seg::QubitPiHalf& x) {
                            if (!(x.duration >= 0)) throw Error(Errc::contract_violation, where + ": negative duration");
                          },
                          [&](const seg::ISwap& x) {
                            if (x.manifold < 1) throw Error(Errc::contract_violation, where + ": manifold must be >= 1");
                          },
                          [&](const seg::Wait& x) {
                            if (!(x.duration >= 0)) throw Error(Errc::contract_violation, where + ": negative duration");
                          },
                          [&](const seg::PhononDrive& x) {
                            if (!(x.amplitude >= 0) || !(x.duration >= 0))
                              throw Error(Errc::contract_violation, where + ": amplitude and duration must be >= 0");
                            if (x.envelope.kind == EnvelopeKind::gaussian && !(x.envelope.sigma > 0))
                              throw Error(Errc::contract_violation, where + ": gaussian sigma must be > 0");
                          },
                          [](const auto&) {}},
               segments[i]);
  }
}

json PulseSequence::to_json() const {
  json segs = json::array();
  for (const auto& s : segments) segs.push_back(segment_to_json(s));
  return json{{"id", id}, {"segments", segs}};
}

// ---------------------------------------------------------------------------

SequenceRunner::SequenceRunner(DeviceParams params, RunnerOptions options)
    : params_(std::move(params)), options_(options) {
  params_.validate();
  if (options_.dim_fock < 3) throw Error(Errc::invalid_dimension, "runner needs dim_fock >= 3");
  if (!(options_.rk4_step > 0)) throw Error(Errc::contract_violation, "rk4_step must be positive");
}

QuantumState SequenceRunner::ground_state() const { return basis_state(0, 0, dim_fock()).to_density(); }

QuantumState SequenceRunner::with_qubit_ground(const QuantumState& phonon) const {
  if (phonon.dim_qubit() != 1) throw Error(Errc::invalid_dimension, "expected an oscillator-only state");
  const int n = dim_fock();
  const Matrix r = resize_fock(phonon.density_matrix(), n);
  Matrix full = Matrix::Zero(2 * n, 2 * n);
  full.topLeftCorner(n, n) = r;
  return QuantumState::density_unchecked(2, n, std::move(full));
}

double SequenceRunner::qubit_drive_for(double omega, double delta) const {
  if (omega == 0) return 0;
  if (delta == 0) throw Error(Errc::outside_dispersive_regime, "phonon drive needs a non-zero detuning");
  const double coupling = options_.calibration == DriveCalibration::dressed_exact
                              ? dressed_drive_coupling(delta, params_.g)
                              : std::abs(params_.g / delta);
  if (!(coupling > 0)) throw Error(Errc::outside_dispersive_regime, "qubit and phonon are uncoupled (g = 0)");
  return omega / coupling;
}

double SequenceRunner::default_frame_offset(double delta) const {
  if (delta == 0 || params_.g == 0) return 0;
  return dressed_frequency_shift(delta, params_.g);
}

Matrix SequenceRunner::frame_hamiltonian(double delta, double frame_offset) const {
  const int n = dim_fock();
  return jc_hamiltonian(delta, params_.g, n).matrix() - frame_offset * excitation_number(n).matrix();
}

const Propagator& SequenceRunner::propagator(double delta, double frame_offset, double qubit_drive, double tau) const {
  const std::array<double, 4> key{delta, frame_offset, qubit_drive, tau};
  {
    std::lock_guard lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return *it->second;
  }
  const int n = dim_fock();
  Matrix h = frame_hamiltonian(delta, frame_offset);
  if (qubit_drive != 0) {
    const Matrix sx = on_qubit(sigma_x(), n).matrix();
    h += 0.5 * qubit_drive * sx;
  }
  const auto collapse = device_collapse(params_, delta, n, options_.noise);
  auto prop = std::make_unique<Propagator>(expm(liouvillian(h, collapse) * tau), 2 * n, tau);
  std::lock_guard lock(cache_mutex_);
  auto [it, inserted] = cache_.emplace(key, std::move(prop));
  return *it->second;
}

std::size_t SequenceRunner::cache_size() const {
  std::lock_guard lock(cache_mutex_);
  return cache_.size();
}

std::vector<Matrix> SequenceRunner::sweep(const Matrix& rho, double delta, double frame_offset, double qubit_drive,
                                          const std::vector<double>& times) const {
  std::vector<Matrix> out;
  out.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] < 0 || (i && times[i] < times[i - 1]))
      throw Error(Errc::contract_violation, "sweep times must be ascending and non-negative");
  double dt = 0;
  if (is_uniform(times, dt)) {
    Matrix cur = times[0] > 0 ? propagator(delta, frame_offset, qubit_drive, times[0]).apply(rho) : rho;
    const Propagator& step = propagator(delta, frame_offset, qubit_drive, dt);
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (i) cur = step.apply(cur);
      out.push_back(cur);
    }
  } else {
    Matrix cur = rho;
    double t = 0;
    for (double target : times) {
      if (target > t) cur = propagator(delta, frame_offset, qubit_drive, target - t).apply(cur);
      t = target;
      out.push_back(cur);
    }
  }
  for (const auto& m : out) check_positivity(m, "sequence sweep");
  return out;
}

Matrix SequenceRunner::apply_qubit_rotation(const Matrix& rho, double angle, double phase) const {
  // U = cos(a/2) - i sin(a/2) (e^{-i phase} s+ + e^{i phase} s-)
  const int n = dim_fock();
  const cplx c = std::cos(0.5 * angle);
  const cplx s = cplx(0, -1) * std::sin(0.5 * angle);
  Matrix u(2 * n, 2 * n);
  u.setZero();
  const Matrix id = Matrix::Identity(n, n);
  u.topLeftCorner(n, n) = c * id;
  u.bottomRightCorner(n, n) = c * id;
  u.bottomLeftCorner(n, n) = s * std::polar(1.0, -phase) * id;  // <e|U|g>
  u.topRightCorner(n, n) = s * std::polar(1.0, phase) * id;     // <g|U|e>
  return u * rho * u.adjoint();
}

Matrix SequenceRunner::apply_reset(const Matrix& rho) const {
  const int n = dim_fock();
  Matrix out = Matrix::Zero(2 * n, 2 * n);
  out.topLeftCorner(n, n) = rho.topLeftCorner(n, n) + rho.bottomRightCorner(n, n);
  return out;
}

Matrix SequenceRunner::shaped_qubit_pulse(const Matrix& rho, double angle, double phase, double duration,
                                          const Frame& frame) const {
  const int n = dim_fock();
  DriveTerm d;
  d.amplitude = angle / duration;
  d.frequency = frame.delta - frame.offset;  // bare qubit transition in the simulation frame
  d.phase = phase;
  d.duration = duration;
  d.envelope = {EnvelopeKind::gaussian, duration / 4};
  LindbladModel model(ComplexOperator(2, n, frame_hamiltonian(frame.delta, frame.offset)),
                      device_collapse(params_, frame.delta, n, options_.noise), {d.to_term(n)});
  EvolveOptions eo;
  eo.step = options_.rk4_step;
  eo.convergence_check = false;
  return evolve(model, QuantumState::density_unchecked(2, n, rho), {duration}, eo).back().density_matrix();
}

Matrix SequenceRunner::phonon_drive(const seg::PhononDrive& d, const Matrix& rho, const Frame& frame) const {
  if (d.duration == 0) return rho;
  const int n = dim_fock();
  const double qd = qubit_drive_for(d.amplitude, frame.delta);
  if (d.envelope.kind == EnvelopeKind::rectangular) {
    // Static in a frame co-rotating with the drive; the phase is a frame rotation.
    const double offset = frame.offset + d.detuning;
    Matrix r = rotate_excitation_phase(rho, -d.phase, 2, n);
    r = propagator(frame.delta, offset, qd, d.duration).apply(r);
    r = rotate_excitation_phase(r, d.phase, 2, n);
    // back to the working frame
    return rotate_excitation_phase(r, d.detuning * d.duration, 2, n);
  }
  DriveTerm term;
  term.amplitude = qd;
  term.frequency = d.detuning;
  term.phase = d.phase;
  term.duration = d.duration;
  term.envelope = d.envelope;
  LindbladModel model(ComplexOperator(2, n, frame_hamiltonian(frame.delta, frame.offset)),
                      device_collapse(params_, frame.delta, n, options_.noise), {term.to_term(n)});
  EvolveOptions eo;
  eo.step = options_.rk4_step;
  eo.convergence_check = false;
  return evolve(model, QuantumState::density_unchecked(2, n, rho), {d.duration}, eo).back().density_matrix();
}

Matrix SequenceRunner::apply_segment(const Segment& s, const Matrix& rho, Frame& frame, SequenceOutcome& out) const {
  const int n = dim_fock();
  const double g = params_.g;
  return std::visit(
      overloaded{
          [&](const seg::QubitPi& x) -> Matrix {
            return x.duration > 0 ? shaped_qubit_pulse(rho, kPi, x.phase, x.duration, frame)
                                  : apply_qubit_rotation(rho, kPi, x.phase);
          },
          [&](const seg::QubitPiHalf& x) -> Matrix {
            return x.duration > 0 ? shaped_qubit_pulse(rho, 0.5 * kPi, x.phase, x.duration, frame)
                                  : apply_qubit_rotation(rho, 0.5 * kPi, x.phase);
          },
          [&](const seg::ISwap& x) -> Matrix {
            if (g == 0) throw Error(Errc::contract_violation, "swap requires g > 0");
            return propagator(0.0, 0.0, 0.0, kPi / (2 * g * std::sqrt(static_cast<double>(x.manifold)))).apply(rho);
          },
          [&](const seg::SqrtISwap&) -> Matrix {
            if (g == 0) throw Error(Errc::contract_violation, "swap requires g > 0");
            return propagator(0.0, 0.0, 0.0, kPi / (4 * g)).apply(rho);
          },
          [&](const seg::StarkShift& x) -> Matrix {
            frame.delta = x.delta;
            frame.offset = x.frame_offset.value_or(default_frame_offset(x.delta));
            return rho;
          },
          [&](const seg::Wait& x) -> Matrix {
            if (x.duration == 0) return rho;
            return propagator(frame.delta, frame.offset, 0.0, x.duration).apply(rho);
          },
          [&](const seg::PhononDrive& x) -> Matrix { return phonon_drive(x, rho, frame); },
          [&](const seg::QubitReset&) -> Matrix { return apply_reset(rho); },
          [&](const seg::MeasureQubit& x) -> Matrix {
            out.measurements.emplace_back(x.label, excited_population(rho, n));
            return rho;
          }},
      s);
}

SequenceOutcome SequenceRunner::run(const PulseSequence& seq, const QuantumState& initial,
                                    std::optional<double> start_delta) const {
  seq.validate();
  const QuantumState init = initial.dim_qubit() == 1 ? with_qubit_ground(initial) : initial;
  if (init.dim_fock() != dim_fock()) throw Error(Errc::dimension_mismatch, "initial state Fock dimension");
  Frame frame{start_delta.value_or(params_.working_delta()), 0.0};
  frame.offset = default_frame_offset(frame.delta);
  SequenceOutcome out{init, {}, 0, 0};
  Matrix rho = init.density_matrix();
  for (const auto& s : seq.segments) {
    rho = apply_segment(s, rho, frame, out);
    const double tr = rho.trace().real();
    if (std::abs(tr - 1.0) > 1e-8)
      throw Error(Errc::integration_failure, "trace drifted to " + std::to_string(tr) + " after " + segment_kind(s));
  }
  check_positivity(rho, "sequence " + seq.id);
  out.state = QuantumState::density_unchecked(2, dim_fock(), 0.5 * (rho + rho.adjoint()));
  out.final_delta = frame.delta;
  out.final_frame_offset = frame.offset;
  return out;
}

// ---------------------------------------------------------------------------

void MeasurementRecord::validate() const {
  if (t.size() != p_excited.size()) throw Error(Errc::dimension_mismatch, "record t and p_excited lengths differ");
  for (double p : p_excited)
    if (!(p >= -1e-9 && p <= 1 + 1e-9)) throw Error(Errc::contract_violation, "record probability outside [0, 1]");
}

CsvTable MeasurementRecord::to_csv() const {
  validate();
  CsvTable table{{"t_s", "p_excited"}, {}};
  for (std::size_t i = 0; i < t.size(); ++i) table.rows.push_back({t[i], p_excited[i]});
  return table;
}

json MeasurementRecord::sidecar() const {
  json j = metadata;
  j["sequence_id"] = sequence_id;
  j["delta_hz"] = units::to_hz(delta);
  j["n_points"] = t.size();
  return j;
}

void MeasurementRecord::save(const std::filesystem::path& csv_path) const {
  write_text_file(csv_path, mechq::to_csv(to_csv()));
  write_json_file(std::filesystem::path(csv_path.string() + ".json"), sidecar());
}

MeasurementRecord MeasurementRecord::load(const std::filesystem::path& csv_path) {
  const CsvTable table = parse_csv(read_text_file(csv_path));
  if (table.header.size() < 2 || table.header[0] != "t_s" || table.header[1] != "p_excited")
    throw Error(Errc::config_parse, csv_path.string() + ": expected columns t_s,p_excited");
  MeasurementRecord r;
  for (const auto& row : table.rows) {
    r.t.push_back(row[0]);
    r.p_excited.push_back(row[1]);
  }
  const std::filesystem::path side(csv_path.string() + ".json");
  if (std::filesystem::exists(side)) {
    r.metadata = read_json_file(side);
    if (r.metadata.contains("sequence_id")) r.sequence_id = r.metadata["sequence_id"].get<std::string>();
    if (r.metadata.contains("delta_hz")) r.delta = units::hz(r.metadata["delta_hz"].get<double>());
  }
  r.validate();
  return r;
}

MeasurementRecord ReadoutModel::apply(const MeasurementRecord& record) const {
  MeasurementRecord out = record;
  std::mt19937_64 rng(seed);
  for (double& p : out.p_excited) {
    p = std::clamp(offset + scale * p, 0.0, 1.0);
    if (shots) {
      std::binomial_distribution<int> dist(*shots, p);
      p = static_cast<double>(dist(rng)) / *shots;
    }
  }
  out.metadata["readout"] = {{"scale", scale}, {"offset", offset}, {"seed", seed}};
  if (shots) out.metadata["readout"]["shots"] = *shots;
  else out.metadata["readout"]["shots"] = "exact";
  return out;
}

std::vector<double> linspace(double a, double b, int n) {
  if (n < 1) throw Error(Errc::contract_violation, "linspace needs n >= 1");
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
  return v;
}

// ---------------------------------------------------------------------------

MeasurementRecord run_rpn(const SequenceRunner& runner, const QuantumState& state, double t_max, int n_points) {
  if (!(t_max > 0) || n_points < 2) throw Error(Errc::contract_violation, "rpn needs t_max > 0 and >= 2 points");
  const QuantumState init = state.dim_qubit() == 1 ? runner.with_qubit_ground(state) : state;
  const int n = runner.dim_fock();
  Matrix rho = init.density_matrix();
  rho = runner.apply_qubit_rotation(rho, kPi, 0.0);
  const auto t = linspace(0, t_max, n_points);
  const auto states = runner.sweep(rho, 0.0, 0.0, 0.0, t);
  MeasurementRecord rec;
  rec.sequence_id = "rpn";
  rec.delta = 0;
  rec.t = t;
  for (const auto& m : states) rec.p_excited.push_back(std::clamp(excited_population(m, n), 0.0, 1.0));
  rec.metadata = {{"experiment", "rpn"}, {"t_max_s", t_max}, {"dim_fock", n}};
  return rec;
}

PulseSequence ramsey_generation_sequence(double delta) {
  PulseSequence s;
  s.id = "ramsey_generation";
  s.add(seg::QubitPi{}).add(seg::SqrtISwap{}).add(seg::QubitPi{}).add(seg::ISwap{2}).add(seg::StarkShift{delta, {}});
  return s;
}

MeasurementRecord run_ramsey_anharmonicity(const SequenceRunner& runner, double delta, double omega_ad, double t_max,
                                           int n_points) {
  const double g = runner.params().g;
  if (!(std::abs(delta) > 2 * g)) throw Error(Errc::inside_avoided_crossing, "Ramsey sequence needs |delta| > 2g");
  if (!(t_max > 0) || n_points < 2) throw Error(Errc::contract_violation, "ramsey needs t_max > 0 and >= 2 points");
  const int n = runner.dim_fock();
  const auto gen = runner.run(ramsey_generation_sequence(delta), runner.ground_state(), delta);
  const auto t = linspace(0, t_max, n_points);
  const auto waited = runner.sweep(gen.state.density_matrix(), delta, gen.final_frame_offset, 0.0, t);
  const Propagator& iswap2 = runner.propagator(0, 0, 0, kPi / (2 * std::sqrt(2.0) * g));
  const Propagator& sqrt_iswap = runner.propagator(0, 0, 0, kPi / (4 * g));
  MeasurementRecord rec;
  rec.sequence_id = "ramsey_anharmonicity";
  rec.delta = delta;
  rec.t = t;
  rec.p_excited.resize(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    Matrix r = iswap2.apply(waited[i]);
    r = runner.apply_qubit_rotation(r, kPi, -omega_ad * t[i]);
    r = sqrt_iswap.apply(r);
    rec.p_excited[i] = std::clamp(excited_population(r, n), 0.0, 1.0);
  }
  rec.metadata = {{"experiment", "ramsey_anharmonicity"},
                  {"omega_ad_hz", units::to_hz(omega_ad)},
                  {"t_max_s", t_max},
                  {"dim_fock", n}};
  return rec;
}

namespace {

PopulationSnapshot snapshot(double x, const Matrix& rho, int n) {
  PopulationSnapshot s;
  s.x = x;
  s.fock.resize(n);
  for (int k = 0; k < n; ++k) s.fock[k] = (rho(k, k) + rho(n + k, n + k)).real();
  s.qubit_excited = excited_population(rho, n);
  return s;
}

// Drive sweep at phase `phase` via frame rotation around a phase-0 propagator.
std::vector<Matrix> drive_sweep(const SequenceRunner& runner, const Matrix& rho, double delta, double omega,
                                double phase, const std::vector<double>& times) {
  const int n = runner.dim_fock();
  const double qd = runner.qubit_drive_for(omega, delta);
  const double offset = runner.default_frame_offset(delta);
  auto out = runner.sweep(rotate_excitation_phase(rho, -phase, 2, n), delta, offset, qd, times);
  for (auto& m : out) m = rotate_excitation_phase(m, phase, 2, n);
  return out;
}

}  // namespace

ExperimentResult run_mech_rabi(const SequenceRunner& runner, double omega_drive, double phase,
                               const std::vector<double>& t_list, const RpnReadout& rpn) {
  const double delta = runner.params().working_delta();
  const int n = runner.dim_fock();
  std::vector<double> sorted = t_list;
  if (!std::is_sorted(sorted.begin(), sorted.end()))
    throw Error(Errc::contract_violation, "t_list must be ascending");
  ExperimentResult res;
  const auto states = drive_sweep(runner, runner.ground_state().density_matrix(), delta, omega_drive, phase, sorted);
  res.records.resize(rpn.enabled ? states.size() : 0);
  for (std::size_t i = 0; i < states.size(); ++i) res.populations.push_back(snapshot(sorted[i], states[i], n));
  if (rpn.enabled) {
    parallel_for(states.size(), [&](std::size_t i) {
      auto rec = run_rpn(runner, QuantumState::density_unchecked(2, n, states[i]), rpn.t_max, rpn.n_points);
      rec.sequence_id = "mech_rabi_rpn";
      rec.metadata["drive_duration_s"] = sorted[i];
      res.records[i] = std::move(rec);
    });
  }
  res.metadata = {{"experiment", "mech_rabi"},
                  {"omega_drive_hz", units::to_hz(omega_drive)},
                  {"qubit_drive_hz", units::to_hz(runner.qubit_drive_for(omega_drive, delta))},
                  {"phase", phase},
                  {"delta_hz", units::to_hz(delta)}};
  return res;
}

namespace {

MeasurementRecord direct_pulse_record(const SequenceRunner& runner, const std::vector<double>& t_list,
                                      const DirectPulseOptions& opts, bool ramsey, double artificial_detuning) {
  const double g = runner.params().g;
  const double op_delta = runner.params().working_delta();
  const double far = opts.far_delta.value_or(runner.params().delta());
  const int n = runner.dim_fock();
  const double omega = opts.omega_drive;
  if (!(omega > 0)) throw Error(Errc::contract_violation, "omega_drive must be > 0");
  const double tau = ramsey ? kPi / (2 * omega) : kPi / omega;
  const double qd = runner.qubit_drive_for(omega, op_delta);
  const double op_offset = runner.default_frame_offset(op_delta);
  const Propagator& pulse = runner.propagator(op_delta, op_offset, qd, tau);
  const Propagator& swap = runner.propagator(0, 0, 0, kPi / (2 * g));

  const Matrix prepared = pulse.apply(runner.ground_state().density_matrix());
  const auto waited = runner.sweep(prepared, far, runner.default_frame_offset(far), 0.0, t_list);
  MeasurementRecord rec;
  rec.sequence_id = ramsey ? "phonon_t2_ramsey" : "phonon_t1";
  rec.delta = far;
  rec.t = t_list;
  rec.p_excited.resize(t_list.size());
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    Matrix r = waited[i];
    if (ramsey) {
      const double phi = artificial_detuning * t_list[i];
      r = rotate_excitation_phase(pulse.apply(rotate_excitation_phase(r, -phi, 2, n)), phi, 2, n);
    }
    r = swap.apply(r);
    rec.p_excited[i] = std::clamp(excited_population(r, n), 0.0, 1.0);
  }
  rec.metadata = {{"experiment", ramsey ? "phonon_t2" : "phonon_t1"},
                  {"omega_drive_hz", units::to_hz(omega)},
                  {"operating_delta_hz", units::to_hz(op_delta)},
                  {"far_delta_hz", units::to_hz(far)}};
  if (ramsey) rec.metadata["artificial_detuning_hz"] = units::to_hz(artificial_detuning);
  return rec;
}

}  // namespace

MeasurementRecord run_phonon_t1(const SequenceRunner& runner, const std::vector<double>& t_list,
                                const DirectPulseOptions& opts) {
  return direct_pulse_record(runner, t_list, opts, false, 0.0);
}

MeasurementRecord run_phonon_t2_ramsey(const SequenceRunner& runner, const std::vector<double>& t_list,
                                       double artificial_detuning, const DirectPulseOptions& opts) {
  return direct_pulse_record(runner, t_list, opts, true, artificial_detuning);
}

ExperimentResult run_spectroscopy(const SequenceRunner& runner, double delta, const std::vector<double>& probe_detunings,
                                  double probe_duration, double probe_amplitude, std::optional<SpectroscopyPump> pump,
                                  const RpnReadout& rpn) {
  if (!(probe_duration > 0)) throw Error(Errc::contract_violation, "probe_duration must be > 0");
  if (!(probe_amplitude >= 0)) throw Error(Errc::contract_violation, "probe_amplitude must be >= 0");
  const int n = runner.dim_fock();
  const double offset = runner.default_frame_offset(delta);
  ExperimentResult res;
  res.populations.resize(probe_detunings.size());
  res.records.resize(rpn.enabled ? probe_detunings.size() : 0);
  const Matrix ground = runner.ground_state().density_matrix();

  parallel_for(probe_detunings.size(), [&](std::size_t i) {
    const double dp = probe_detunings[i];
    Matrix rho;
    if (!pump || pump->amplitude == 0) {
      seg::PhononDrive d{probe_amplitude, 0.0, probe_duration, dp, {}};
      PulseSequence s;
      s.id = "spectroscopy_probe";
      s.add(d);
      rho = runner.run(s, QuantumState::density_unchecked(2, n, ground), delta).state.density_matrix();
    } else {
      // Two tones: pump static in the frame, probe rotating at dp.
      DriveTerm pump_term;
      pump_term.amplitude = runner.qubit_drive_for(pump->amplitude, delta);
      pump_term.duration = probe_duration;
      DriveTerm probe_term;
      probe_term.amplitude = runner.qubit_drive_for(probe_amplitude, delta);
      probe_term.frequency = dp;
      probe_term.duration = probe_duration;
      const Matrix h =
          jc_hamiltonian(delta, runner.params().g, n).matrix() - offset * excitation_number(n).matrix();
      LindbladModel model(ComplexOperator(2, n, h), device_collapse(runner.params(), delta, n, runner.options().noise),
                          {pump_term.to_term(n), probe_term.to_term(n)});
      EvolveOptions eo;
      eo.step = std::max(runner.options().rk4_step, 1e-8);
      eo.convergence_check = false;
      rho = evolve(model, QuantumState::density_unchecked(2, n, ground), {probe_duration}, eo).back().density_matrix();
    }
    res.populations[i] = snapshot(dp, rho, n);
    if (rpn.enabled) {
      auto rec = run_rpn(runner, QuantumState::density_unchecked(2, n, rho), rpn.t_max, rpn.n_points);
      rec.sequence_id = "spectroscopy_rpn";
      rec.metadata["probe_detuning_hz"] = units::to_hz(dp);
      res.records[i] = std::move(rec);
    }
  });
  res.metadata = {{"experiment", "spectroscopy"},
                  {"delta_hz", units::to_hz(delta)},
                  {"probe_duration_s", probe_duration},
                  {"probe_amplitude_hz", units::to_hz(probe_amplitude)}};
  if (pump) res.metadata["pump_amplitude_hz"] = units::to_hz(pump->amplitude);
  return res;
}

// ---------------------------------------------------------------------------

CardinalPoint cardinal_from_string(const std::string& name) {
  if (name == "zero") return CardinalPoint::zero;
  if (name == "one") return CardinalPoint::one;
  if (name == "plus") return CardinalPoint::plus;
  if (name == "minus") return CardinalPoint::minus;
  if (name == "plus_i") return CardinalPoint::plus_i;
  if (name == "minus_i") return CardinalPoint::minus_i;
  throw Error(Errc::usage, "unknown cardinal point '" + name + "' (zero, one, plus, minus, plus_i, minus_i)");
}

std::string to_string(CardinalPoint p) {
  switch (p) {
    case CardinalPoint::zero: return "zero";
    case CardinalPoint::one: return "one";
    case CardinalPoint::plus: return "plus";
    case CardinalPoint::minus: return "minus";
    case CardinalPoint::plus_i: return "plus_i";
    case CardinalPoint::minus_i: return "minus_i";
  }
  return "unknown";
}

namespace {

double azimuth_of(CardinalPoint p) {
  switch (p) {
    case CardinalPoint::plus: return 0.0;
    case CardinalPoint::plus_i: return 0.5 * kPi;
    case CardinalPoint::minus: return kPi;
    case CardinalPoint::minus_i: return 1.5 * kPi;
    default: return 0.0;
  }
}

}  // namespace

QuantumState cardinal_target(CardinalPoint p, int dim_fock) {
  if (p == CardinalPoint::zero) return fock_state(0, dim_fock);
  if (p == CardinalPoint::one) return fock_state(1, dim_fock);
  Vector v = Vector::Zero(dim_fock);
  v(0) = 1.0 / std::sqrt(2.0);
  v(1) = std::polar(1.0 / std::sqrt(2.0), azimuth_of(p));
  return QuantumState::ket(1, dim_fock, std::move(v));
}

double cardinal_drive_phase(const SequenceRunner& runner, double azimuth, double omega_drive) {
  RunnerOptions lossless = runner.options();
  lossless.noise = NoiseModel::none();
  SequenceRunner cal(runner.params(), lossless);
  const double delta = runner.params().working_delta();
  const Matrix r =
      cal.propagator(delta, cal.default_frame_offset(delta), cal.qubit_drive_for(omega_drive, delta), kPi / (2 * omega_drive))
          .apply(cal.ground_state().density_matrix());
  const int n = cal.dim_fock();
  const cplx rho10 = r(1, 0) + r(n + 1, n);  // reduced phonon <1|rho|0>
  // A drive phase phi multiplies rho10 by e^{-i phi}.
  return std::arg(rho10) - azimuth;
}

QuantumState prepare_cardinal_state(const SequenceRunner& runner, CardinalPoint point, double omega_drive) {
  if (!(omega_drive > 0)) throw Error(Errc::contract_violation, "omega_drive must be > 0");
  if (point == CardinalPoint::zero) return runner.ground_state();
  const double delta = runner.params().working_delta();
  PulseSequence s;
  s.id = "cardinal_" + to_string(point);
  if (point == CardinalPoint::one) {
    s.add(seg::PhononDrive{omega_drive, 0.0, kPi / omega_drive, 0.0, {}});
  } else {
    const double phi = cardinal_drive_phase(runner, azimuth_of(point), omega_drive);
    s.add(seg::PhononDrive{omega_drive, phi, kPi / (2 * omega_drive), 0.0, {}});
  }
  return runner.run(s, runner.ground_state(), delta).state;
}

}  // namespace mechq
