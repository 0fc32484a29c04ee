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

// Command-line front end. Everything the `mechq` binary does goes through
// run_cli so tests can drive it in-process.

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mechq/device_model.hpp"
#include "mechq/error.hpp"
#include "mechq/io.hpp"

namespace mechq::cli {

struct RunConfig {
  std::string device_source;  // path, or "builtin:reference"
  DeviceParams device;
  std::string experiment;
  json parameters = json::object();  // experiment key-values, SI / Hz with unit suffixes
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  std::optional<int> shots;  // nullopt: exact probabilities

  void validate() const;
};

const std::vector<std::string>& registered_experiments();
const std::vector<std::string>& registered_fit_methods();

/// Fills unset parameters with the experiment defaults (so the manifest is complete).
json resolve_parameters(const std::string& experiment, const DeviceParams& device, const json& given);

/// Runs one experiment and writes its outputs plus manifest.json. Returns the manifest.
json execute_run(const RunConfig& config);

/// Theory table over an ascending detuning grid (Hz). Columns: delta_hz, alpha_hz,
/// gamma2_purcell_per_s, gamma2_total_per_s, p_p1, alpha_over_gamma2.
CsvTable theory_table(const DeviceParams& device, double delta_min_hz, double delta_max_hz, double step_hz);

/// Process exit status for a library error category.
int exit_code(Errc code);

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mechq::cli
