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

#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mechq {

enum class Errc {
  invalid_dimension,
  contract_violation,
  outside_dispersive_regime,
  degenerate_branch,
  inside_avoided_crossing,
  integration_failure,
  ill_conditioned_basis,
  fit_initialization,
  fit_failure,
  under_determined,
  dimension_mismatch,
  config_parse,
  usage,
  io,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library carries one of the codes above so that
/// callers (and the CLI exit status) can branch on the category.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Non-fatal diagnostics (positivity floor, Wigner truncation). Default sink is
// stderr; tests swap it out to observe warnings.
using WarningHandler = std::function<void(std::string_view)>;
WarningHandler set_warning_handler(WarningHandler handler);
void warn(std::string_view message);

}  // namespace mechq
