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

// JSON / CSV persistence shared by all modules.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "mechq/hilbert.hpp"

namespace mechq {

using json = nlohmann::json;

/// {dim_qubit, dim_fock, re, im} with row-major flat arrays.
json operator_to_json(const ComplexOperator& op);
ComplexOperator operator_from_json(const json& j);

/// States are always persisted as density matrices in the operator format,
/// plus "kind": "density".
json state_to_json(const QuantumState& state);
QuantumState state_from_json(const json& j);

/// Parse errors carry line/column context as Errc::config_parse.
json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const json& j);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

/// Shortest round-trip decimal representation; keeps CSV output byte-stable.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};
std::string to_csv(const CsvTable& table);
CsvTable parse_csv(const std::string& text);

}  // namespace mechq
