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

#include "mechq/error.hpp"

#include <iostream>
#include <mutex>

namespace mechq {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_dimension: return "invalid-dimension";
    case Errc::contract_violation: return "contract-violation";
    case Errc::outside_dispersive_regime: return "outside-dispersive-regime";
    case Errc::degenerate_branch: return "degenerate-branch";
    case Errc::inside_avoided_crossing: return "inside-avoided-crossing";
    case Errc::integration_failure: return "integration-failure";
    case Errc::ill_conditioned_basis: return "ill-conditioned-basis";
    case Errc::fit_initialization: return "fit-initialization";
    case Errc::fit_failure: return "fit-failure";
    case Errc::under_determined: return "under-determined";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::config_parse: return "config-parse";
    case Errc::usage: return "usage";
    case Errc::io: return "io";
  }
  return "unknown";
}

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler_slot() {
  static WarningHandler h = [](std::string_view msg) { std::cerr << "mechq warning: " << msg << '\n'; };
  return h;
}

}  // namespace

WarningHandler set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(handler_mutex());
  WarningHandler previous = std::move(handler_slot());
  handler_slot() = std::move(handler);
  return previous;
}

void warn(std::string_view message) {
  std::lock_guard lock(handler_mutex());
  if (handler_slot()) handler_slot()(message);
}

}  // namespace mechq
