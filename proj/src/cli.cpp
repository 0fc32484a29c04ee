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

#include "mechq/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include "mechq/error.hpp"
#include "mechq/estimation.hpp"
#include "mechq/sequences.hpp"
#include "mechq/units.hpp"

#ifndef MECHQ_VERSION
#define MECHQ_VERSION "unknown"
#endif

namespace mechq::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kReferenceSource = "builtin:reference";

std::string joined(const std::vector<std::string>& names) {
  std::string s;
  for (const auto& n : names) s += (s.empty() ? "" : ", ") + n;
  return s;
}

void require_registered(const std::string& name, const std::vector<std::string>& names, const char* what) {
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw Error(Errc::usage, std::string("unknown ") + what + " '" + name + "'; registered: " + joined(names));
}

double get_num(const json& p, const char* key) {
  if (!p.contains(key) || !p[key].is_number()) throw Error(Errc::config_parse, std::string("parameter '") + key + "' must be a number");
  return p[key].get<double>();
}

int get_int(const json& p, const char* key) {
  const double v = get_num(p, key);
  if (v != std::floor(v)) throw Error(Errc::config_parse, std::string("parameter '") + key + "' must be an integer");
  return static_cast<int>(v);
}

RunnerOptions runner_options(const json& p) {
  RunnerOptions o;
  o.dim_fock = get_int(p, "dim_fock");
  const std::string noise = p.value("noise", std::string("full"));
  if (noise == "none") o.noise = NoiseModel::none();
  else if (noise != "full") throw Error(Errc::config_parse, "parameter 'noise' must be 'full' or 'none'");
  return o;
}

DeviceParams with_delta(DeviceParams d, const json& p) {
  if (p.contains("delta_hz")) d.operating_delta = units::hz(get_num(p, "delta_hz"));
  return d;
}

std::vector<double> time_grid(const json& p) {
  return linspace(0.0, get_num(p, "t_max_us") * 1e-6, get_int(p, "points"));
}

CsvTable population_table(const char* x_name, double x_scale, const std::vector<PopulationSnapshot>& pops) {
  CsvTable t;
  t.header = {x_name, "qubit_excited"};
  const std::size_t n = pops.empty() ? 0 : pops.front().fock.size();
  for (std::size_t k = 0; k < n; ++k) t.header.push_back("p" + std::to_string(k));
  for (const auto& s : pops) {
    std::vector<double> row{s.x * x_scale, s.qubit_excited};
    row.insert(row.end(), s.fock.begin(), s.fock.end());
    t.rows.push_back(std::move(row));
  }
  return t;
}

class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  void record(const std::string& name, const MeasurementRecord& r, const RunConfig& cfg) {
    MeasurementRecord out = r;
    if (cfg.shots) out = ReadoutModel{1.0, 0.0, cfg.shots, cfg.seed + files_.size()}.apply(r);
    out.save(dir_ / name);
    files_.push_back(name);
    files_.push_back(name + ".json");
  }
  void table(const std::string& name, const CsvTable& t) {
    write_text_file(dir_ / name, to_csv(t));
    files_.push_back(name);
  }
  void document(const std::string& name, const json& j) {
    write_json_file(dir_ / name, j);
    files_.push_back(name);
  }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

json manifest_base(const std::string& command, double wall_s) {
  return json{{"tool", "mechq"}, {"version", MECHQ_VERSION}, {"command", command}, {"wall_time_s", wall_s}};
}

}  // namespace

const std::vector<std::string>& registered_experiments() {
  static const std::vector<std::string> names{"theory", "spectroscopy", "ramsey_anharmonicity", "rpn",
                                              "mech_rabi", "phonon_t1", "phonon_t2", "cardinal_states"};
  return names;
}

const std::vector<std::string>& registered_fit_methods() {
  static const std::vector<std::string> names{"ramsey", "damped_cosine", "exponential", "ladder",
                                              "decaying_oscillation", "lorentzian", "rpn"};
  return names;
}

void RunConfig::validate() const {
  require_registered(experiment, registered_experiments(), "experiment");
  device.validate();
  if (output_dir.empty()) throw Error(Errc::usage, "an output directory is required (--out)");
  if (shots && *shots < 1) throw Error(Errc::usage, "shots must be >= 1 or 'exact'");
  if (!parameters.is_object()) throw Error(Errc::config_parse, "parameters must be a JSON object");
}

json resolve_parameters(const std::string& experiment, const DeviceParams& device, const json& given) {
  require_registered(experiment, registered_experiments(), "experiment");
  json d;
  const double delta_hz = units::to_hz(device.working_delta());
  if (experiment == "theory") {
    d = {{"delta_min_hz", -4.0e6}, {"delta_max_hz", -0.5e6}, {"delta_step_hz", 1.0e4}};
  } else if (experiment == "spectroscopy") {
    // The probe strength has no sensible default; it must be given.
    if (!given.contains("drive_hz"))
      throw Error(Errc::usage, "spectroscopy needs an explicit probe amplitude (--drive-hz)");
    d = {{"delta_hz", delta_hz}, {"drive_hz", nullptr}, {"pump_hz", 0.0},  {"span_hz", 100.0e3},
         {"points", 101},        {"probe_us", 100.0},   {"dim_fock", 10},  {"noise", "full"}};
  } else if (experiment == "ramsey_anharmonicity") {
    d = {{"delta_hz", delta_hz}, {"omega_ad_hz", 100.0e3}, {"t_max_us", 50.0}, {"points", 101},
         {"dim_fock", 10},       {"noise", "full"}};
  } else if (experiment == "rpn") {
    d = {{"fock", 1}, {"t_max_us", 10.0}, {"points", 101}, {"dim_fock", 10}, {"noise", "full"}};
  } else if (experiment == "mech_rabi") {
    d = {{"delta_hz", delta_hz}, {"drive_hz", units::to_hz(kDefaultMechanicalRabi)},
         {"t_max_us", 150.0},   {"points", 61},
         {"rpn", false},        {"dim_fock", 10},
         {"noise", "full"}};
  } else if (experiment == "phonon_t1" || experiment == "phonon_t2") {
    d = {{"delta_hz", delta_hz}, {"far_delta_hz", units::to_hz(device.delta())},
         {"drive_hz", units::to_hz(kDefaultMechanicalRabi)},
         {"t_max_us", 400.0},   {"points", 101},
         {"dim_fock", 10},      {"noise", "full"}};
    if (experiment == "phonon_t2") d["omega_ad_hz"] = 20.0e3;
  } else if (experiment == "cardinal_states") {
    d = {{"delta_hz", delta_hz}, {"drive_hz", units::to_hz(kDefaultMechanicalRabi)}, {"dim_fock", 10},
         {"noise", "full"}};
  }
  for (auto it = given.begin(); it != given.end(); ++it) {
    if (!d.contains(it.key()))
      throw Error(Errc::usage, "parameter '" + it.key() + "' does not apply to experiment '" + experiment + "'");
    d[it.key()] = it.value();
  }
  return d;
}

CsvTable theory_table(const DeviceParams& device, double delta_min_hz, double delta_max_hz, double step_hz) {
  if (!(step_hz > 0) || !(delta_max_hz >= delta_min_hz))
    throw Error(Errc::contract_violation, "theory grid needs step > 0 and max >= min");
  CsvTable t{{"delta_hz", "alpha_hz", "gamma2_purcell_per_s", "gamma2_total_per_s", "p_p1", "alpha_over_gamma2"}, {}};
  const long n = std::lround(std::floor((delta_max_hz - delta_min_hz) / step_hz + 1e-9));
  for (long i = 0; i <= n; ++i) {
    // Integer multiples of the step keep grid values exact (e.g. -710 kHz).
    const double f = delta_min_hz + static_cast<double>(i) * step_hz;
    const double dz = std::round(f * 1e6) / 1e6;
    const double delta = units::hz(dz);
    const DerivedRates r = coherence_budget(device, delta);
    t.rows.push_back({dz, units::to_hz(r.alpha), r.Gamma2_purcell, r.Gamma2_total,
                      phonon_weight(delta, device.g, 1), r.ratio_exact});
  }
  return t;
}

json execute_run(const RunConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const json p = resolve_parameters(config.experiment, config.device, config.parameters);
  fs::create_directories(config.output_dir);
  OutputSet out(config.output_dir);
  const std::string& ex = config.experiment;

  if (ex == "theory") {
    out.table("theory.csv", theory_table(config.device, get_num(p, "delta_min_hz"), get_num(p, "delta_max_hz"),
                                         get_num(p, "delta_step_hz")));
  } else {
    const DeviceParams dev = with_delta(config.device, p);
    const SequenceRunner runner(dev, runner_options(p));
    const double delta = dev.working_delta();
    if (ex == "ramsey_anharmonicity") {
      out.record("ramsey.csv",
                 run_ramsey_anharmonicity(runner, delta, units::hz(get_num(p, "omega_ad_hz")),
                                          get_num(p, "t_max_us") * 1e-6, get_int(p, "points")),
                 config);
    } else if (ex == "rpn") {
      const int n = get_int(p, "fock");
      if (n < 0 || n >= runner.dim_fock()) throw Error(Errc::contract_violation, "fock must be within 0..dim_fock-1");
      out.record("rpn.csv",
                 run_rpn(runner, runner.with_qubit_ground(fock_state(n, runner.dim_fock())),
                         get_num(p, "t_max_us") * 1e-6, get_int(p, "points")),
                 config);
    } else if (ex == "mech_rabi") {
      RpnReadout rpn;
      rpn.enabled = p["rpn"].get<bool>();
      const auto res = run_mech_rabi(runner, units::hz(get_num(p, "drive_hz")), 0.0, time_grid(p), rpn);
      out.table("populations.csv", population_table("t_s", 1.0, res.populations));
      for (std::size_t i = 0; i < res.records.size(); ++i)
        out.record("rpn_" + std::to_string(i) + ".csv", res.records[i], config);
    } else if (ex == "phonon_t1" || ex == "phonon_t2") {
      DirectPulseOptions o;
      o.omega_drive = units::hz(get_num(p, "drive_hz"));
      o.far_delta = units::hz(get_num(p, "far_delta_hz"));
      if (ex == "phonon_t1")
        out.record("t1.csv", run_phonon_t1(runner, time_grid(p), o), config);
      else
        out.record("t2.csv", run_phonon_t2_ramsey(runner, time_grid(p), units::hz(get_num(p, "omega_ad_hz")), o),
                   config);
    } else if (ex == "spectroscopy") {
      const double span = units::hz(get_num(p, "span_hz"));
      const auto probes = linspace(-0.5 * span, 0.5 * span, get_int(p, "points"));
      std::optional<SpectroscopyPump> pump;
      if (get_num(p, "pump_hz") > 0) pump = SpectroscopyPump{units::hz(get_num(p, "pump_hz"))};
      const auto res = run_spectroscopy(runner, delta, probes, get_num(p, "probe_us") * 1e-6,
                                        units::hz(get_num(p, "drive_hz")), pump);
      out.table("spectrum.csv", population_table("probe_detuning_hz", 1.0 / units::two_pi, res.populations));
    } else if (ex == "cardinal_states") {
      json fids = json::object();
      const double omega = units::hz(get_num(p, "drive_hz"));
      for (auto point : {CardinalPoint::zero, CardinalPoint::one, CardinalPoint::plus, CardinalPoint::minus,
                         CardinalPoint::plus_i, CardinalPoint::minus_i}) {
        const std::string name = to_string(point);
        const QuantumState state = prepare_cardinal_state(runner, point, omega);
        out.document("state_" + name + ".json", state_to_json(state));
        const double f = fidelity(reduced_phonon(state), cardinal_target(point, runner.dim_fock()).to_density());
        fids[name] = {{"fidelity", f}, {"fidelity_squared", f * f}};
      }
      out.document("fidelities.json", fids);
    }
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json m = manifest_base("run", wall);
  m["experiment"] = ex;
  m["device_source"] = config.device_source;
  m["device"] = device_params_to_json(config.device);
  m["parameters"] = p;
  m["seed"] = config.seed;
  m["shots"] = config.shots ? json(*config.shots) : json("exact");
  m["outputs"] = out.files();
  write_json_file(config.output_dir / "manifest.json", m);
  return m;
}

int exit_code(Errc code) { return code == Errc::usage ? 2 : 1; }

namespace {

struct Loaded {
  std::string source;
  DeviceParams device;
};

Loaded load_device(const std::string& path) {
  if (path.empty()) return {kReferenceSource, DeviceParams::reference()};
  return {path, load_device_params(path)};
}

std::optional<int> parse_shots(const std::string& s) {
  if (s.empty() || s == "exact") return std::nullopt;
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(Errc::usage, "--shots must be a positive integer or 'exact', got '" + s + "'");
  }
}

json fit_command(const std::string& method, const fs::path& input, const std::string& config_path,
                 std::optional<double> gamma1, std::optional<double> omega_ad_hz, int n_max,
                 const std::string& column, const fs::path& out_dir) {
  require_registered(method, registered_fit_methods(), "fit method");
  const auto t0 = std::chrono::steady_clock::now();
  if (!fs::exists(input)) throw Error(Errc::io, "input file not found: " + input.string());
  const Loaded dev = load_device(config_path);
  json result;
  if (method == "lorentzian") {
    const CsvTable t = parse_csv(read_text_file(input));
    const auto it = std::find(t.header.begin(), t.header.end(), column);
    if (it == t.header.end()) throw Error(Errc::config_parse, input.string() + ": no column '" + column + "'");
    const auto c = static_cast<std::size_t>(it - t.header.begin());
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : t.rows) pts.emplace_back(units::hz(row[0]), row[c]);
    result = fit_lorentzian(pts).to_json();
  } else {
    const MeasurementRecord rec = MeasurementRecord::load(input);
    if (method == "ramsey") {
      const double g1 = gamma1.value_or(dev.device.phonon_gamma1());
      double ad = 0;
      if (omega_ad_hz) ad = units::hz(*omega_ad_hz);
      else if (rec.metadata.contains("omega_ad_hz")) ad = units::hz(rec.metadata["omega_ad_hz"].get<double>());
      result = fit_ramsey_anharmonicity(rec, g1, ad).to_json();
    } else if (method == "damped_cosine") {
      result = fit_damped_cosine(rec).to_json();
    } else if (method == "exponential") {
      result = fit_exponential(rec).to_json();
    } else if (method == "ladder") {
      result = fit_ladder_decay(rec).to_json();
    } else if (method == "decaying_oscillation") {
      result = fit_decaying_oscillation(rec).to_json();
    } else if (method == "rpn") {
      RunnerOptions o;
      if (rec.metadata.contains("dim_fock")) o.dim_fock = rec.metadata["dim_fock"].get<int>();
      const SequenceRunner runner(dev.device, o);
      result = rpn_fit(rec, runner, n_max).to_json();
      result["model"] = "rpn";
      result["n_max"] = n_max;
    }
  }
  fs::create_directories(out_dir);
  write_json_file(out_dir / "fit.json", result);
  json m = manifest_base("fit", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  m["method"] = method;
  m["input"] = fs::absolute(input).string();
  m["device_source"] = dev.source;
  m["device"] = device_params_to_json(dev.device);
  if (gamma1) m["gamma1_per_s"] = *gamma1;
  if (omega_ad_hz) m["omega_ad_hz"] = *omega_ad_hz;
  m["n_max"] = n_max;
  m["column"] = column;
  m["outputs"] = {"fit.json"};
  write_json_file(out_dir / "manifest.json", m);
  return result;
}

json wigner_command(const fs::path& state_path, double extent, int points, const fs::path& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  QuantumState st = state_from_json(read_json_file(state_path));
  if (st.dim_qubit() == 2) st = reduced_phonon(st);
  const auto grid = square_grid(extent, points);
  const auto w = wigner(st, grid);
  CsvTable t{{"re_beta", "im_beta", "w"}, {}};
  for (std::size_t i = 0; i < grid.size(); ++i) t.rows.push_back({grid[i].real(), grid[i].imag(), w[i]});
  fs::create_directories(out_dir);
  write_text_file(out_dir / "wigner.csv", to_csv(t));
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  json summary{{"min", *lo}, {"max", *hi}};
  json m = manifest_base("wigner", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  m["state"] = fs::absolute(state_path).string();
  m["extent"] = extent;
  m["points"] = points;
  m["summary"] = summary;
  m["outputs"] = {"wigner.csv"};
  write_json_file(out_dir / "manifest.json", m);
  return summary;
}

RunConfig config_from_manifest(const json& m, const fs::path& out_dir) {
  if (!m.contains("command") || m["command"] != "run")
    throw Error(Errc::config_parse, "manifest does not describe a 'run' command");
  RunConfig c;
  c.device_source = m.value("device_source", std::string(kReferenceSource));
  c.device = device_params_from_json(m.at("device"));
  c.experiment = m.at("experiment").get<std::string>();
  c.parameters = m.at("parameters");
  c.seed = m.at("seed").get<std::uint64_t>();
  if (m.at("shots").is_number_integer()) c.shots = m["shots"].get<int>();
  c.output_dir = out_dir;
  return c;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mechq: simulation and analysis of a qubit coupled to a mechanical mode", "mechq"};
  app.set_version_flag("--version", MECHQ_VERSION);
  app.require_subcommand(1);

  std::string config_path, out_dir, experiment, shots_s = "exact", state_path, input_path, method,
                                                column = "p1";
  std::uint64_t seed = 0;
  std::optional<double> delta_hz, drive_hz, t_max_us, omega_ad_hz, far_delta_hz, pump_hz, span_hz, probe_us,
      gamma1, dmin, dmax, dstep;
  std::optional<int> points, fock, dim_fock;
  bool rpn_flag = false, lossless = false;
  int n_max = 3, wpoints = 41;
  double extent = 2.5;

  auto* run = app.add_subcommand("run", "Simulate an experiment and write records");
  run->add_option("experiment", experiment, "One of: " + joined(registered_experiments()))->required();
  run->add_option("--config", config_path, "Device JSON (default: built-in reference device)");
  run->add_option("--out", out_dir, "Output directory");  // checked after the experiment name
  run->add_option("--delta-hz", delta_hz, "Operating detuning (Hz)");
  run->add_option("--drive-hz", drive_hz, "Mechanical drive / probe Rabi frequency (Hz)");
  run->add_option("--t-max-us", t_max_us, "Sweep length (us)");
  run->add_option("--points", points, "Number of sweep points");
  run->add_option("--omega-ad-hz", omega_ad_hz, "Artificial detuning (Hz)");
  run->add_option("--far-delta-hz", far_delta_hz, "Wait detuning for T1/T2 (Hz)");
  run->add_option("--pump-hz", pump_hz, "Spectroscopy pump Rabi frequency (Hz)");
  run->add_option("--span-hz", span_hz, "Spectroscopy probe span (Hz)");
  run->add_option("--probe-us", probe_us, "Spectroscopy probe duration (us)");
  run->add_option("--fock", fock, "Fock state for the rpn experiment");
  run->add_option("--dim-fock", dim_fock, "Fock truncation");
  run->add_flag("--rpn", rpn_flag, "Add an RPN readout to each mech_rabi point");
  run->add_flag("--lossless", lossless, "Disable all dissipation");
  run->add_option("--shots", shots_s, "Shots per point, or 'exact'");
  run->add_option("--seed", seed, "Readout sampling seed");

  auto* theory = app.add_subcommand("theory", "Write the closed-form theory table");
  theory->add_option("--config", config_path, "Device JSON (default: built-in reference device)");
  theory->add_option("--out", out_dir, "Output directory")->required();
  theory->add_option("--delta-min-hz", dmin, "Grid start (Hz)");
  theory->add_option("--delta-max-hz", dmax, "Grid end (Hz)");
  theory->add_option("--delta-step-hz", dstep, "Grid step (Hz)");

  auto* fit = app.add_subcommand("fit", "Fit a record");
  fit->add_option("method", method, "One of: " + joined(registered_fit_methods()))->required();
  fit->add_option("--input", input_path, "Record CSV (with optional .json sidecar)")->required();
  fit->add_option("--out", out_dir, "Output directory")->required();
  fit->add_option("--config", config_path, "Device JSON (ramsey gamma1, rpn basis)");
  fit->add_option("--gamma1-per-s", gamma1, "Fixed phonon energy-decay rate for the ramsey model");
  fit->add_option("--omega-ad-hz", omega_ad_hz, "Artificial detuning used by the record (Hz)");
  fit->add_option("--n-max", n_max, "Highest Fock level in the rpn fit");
  fit->add_option("--column", column, "Column fitted by the lorentzian method");

  auto* wig = app.add_subcommand("wigner", "Evaluate the Wigner function of a persisted state");
  wig->add_option("--state", state_path, "State JSON")->required();
  wig->add_option("--out", out_dir, "Output directory")->required();
  wig->add_option("--extent", extent, "Half-width of the square grid");
  wig->add_option("--points", wpoints, "Points per axis");

  std::string manifest_path;
  auto* replay = app.add_subcommand("replay", "Re-run a 'run' manifest");
  replay->add_option("manifest", manifest_path, "manifest.json")->required();
  replay->add_option("--out", out_dir, "Output directory")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    try {
      app.parse(rev);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForVersion&) {
      out << MECHQ_VERSION << "\n";
      return 0;
    } catch (const CLI::ParseError& e) {
      throw Error(Errc::usage, e.what());
    }

    if (*run) {
      require_registered(experiment, registered_experiments(), "experiment");
      RunConfig c;
      const Loaded dev = load_device(config_path);
      c.device_source = dev.source;
      c.device = dev.device;
      c.experiment = experiment;
      c.output_dir = out_dir;
      c.seed = seed;
      c.shots = parse_shots(shots_s);
      json& p = c.parameters;
      auto put = [&](const char* k, const auto& v) {
        if (v) p[k] = *v;
      };
      put("delta_hz", delta_hz);
      put("drive_hz", drive_hz);
      put("t_max_us", t_max_us);
      put("points", points);
      put("omega_ad_hz", omega_ad_hz);
      put("far_delta_hz", far_delta_hz);
      put("pump_hz", pump_hz);
      put("span_hz", span_hz);
      put("probe_us", probe_us);
      put("fock", fock);
      put("dim_fock", dim_fock);
      if (rpn_flag) p["rpn"] = true;
      if (lossless) p["noise"] = "none";
      if (experiment == "theory") p.erase("noise");
      const json m = execute_run(c);
      out << "wrote " << m["outputs"].size() << " file(s) to " << out_dir << "\n";
    } else if (*theory) {
      RunConfig c;
      const Loaded dev = load_device(config_path);
      c.device_source = dev.source;
      c.device = dev.device;
      c.experiment = "theory";
      c.output_dir = out_dir;
      if (dmin) c.parameters["delta_min_hz"] = *dmin;
      if (dmax) c.parameters["delta_max_hz"] = *dmax;
      if (dstep) c.parameters["delta_step_hz"] = *dstep;
      execute_run(c);
      out << "wrote " << (fs::path(out_dir) / "theory.csv").string() << "\n";
    } else if (*fit) {
      const json r = fit_command(method, input_path, config_path, gamma1, omega_ad_hz, n_max, column, out_dir);
      out << r.dump(2) << "\n";
    } else if (*wig) {
      const json s = wigner_command(state_path, extent, wpoints, out_dir);
      out << "wigner min " << s["min"].get<double>() << " max " << s["max"].get<double>() << "\n";
    } else if (*replay) {
      const json m = execute_run(config_from_manifest(read_json_file(manifest_path), out_dir));
      out << "replayed " << m["experiment"].get<std::string>() << " into " << out_dir << "\n";
    }
    return 0;
  } catch (const Error& e) {
    err << "mechq: " << e.what() << "\n";
    if (e.code() == Errc::usage) err << "run 'mechq --help' for usage\n";
    return exit_code(e.code());
  } catch (const json::exception& e) {
    err << "mechq: config-parse: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "mechq: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mechq::cli
