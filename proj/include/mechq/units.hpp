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

#include <numbers>

// Internally every frequency is an angular frequency in rad/s and every time is
// in seconds. Hz only appears at the file/CLI boundary.
namespace mechq::units {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

constexpr double hz(double f) { return two_pi * f; }
constexpr double khz(double f) { return two_pi * 1e3 * f; }
constexpr double mhz(double f) { return two_pi * 1e6 * f; }
constexpr double ghz(double f) { return two_pi * 1e9 * f; }

constexpr double to_hz(double omega) { return omega / two_pi; }
constexpr double to_khz(double omega) { return omega / (two_pi * 1e3); }

constexpr double us(double t) { return 1e-6 * t; }
constexpr double ns(double t) { return 1e-9 * t; }

}  // namespace mechq::units
