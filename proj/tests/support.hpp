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

// Shared helpers for the test binaries.

#pragma once

#include <gtest/gtest.h>

#include <random>

#include "mechq/error.hpp"
#include "mechq/hilbert.hpp"

namespace mechq::testing {

#define EXPECT_ERRC(stmt, errc)                                                     \
  do {                                                                              \
    try {                                                                           \
      stmt;                                                                         \
      ADD_FAILURE() << "expected " << ::mechq::to_string(errc) << ", nothing thrown"; \
    } catch (const ::mechq::Error& e) {                                             \
      EXPECT_EQ(e.code(), errc) << e.what();                                        \
    }                                                                               \
  } while (0)

inline Matrix random_matrix(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0, 1);
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = cplx(n(rng), n(rng));
  return m;
}

inline Matrix random_hermitian(std::mt19937_64& rng, int d) {
  const Matrix m = random_matrix(rng, d);
  return 0.5 * (m + m.adjoint());
}

// Ginibre-distributed density matrix of the given rank.
inline Matrix random_density(std::mt19937_64& rng, int d, int rank = -1) {
  std::normal_distribution<double> n(0, 1);
  const int r = rank < 0 ? d : rank;
  Matrix g(d, r);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < r; ++j) g(i, j) = cplx(n(rng), n(rng));
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace mechq::testing
