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

#include <filesystem>

#include "mechq/device_model.hpp"
#include "mechq/io.hpp"
#include "support.hpp"

using namespace mechq;
using namespace mechq::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "mechq_test_io" / name;
  fs::create_directories(p.parent_path());
  return p;
}

}  // namespace

TEST(OperatorJson, RoundTripIsExact) {
  std::mt19937_64 rng(3);
  const ComplexOperator op(2, 3, random_matrix(rng, 6));
  const json j = operator_to_json(op);
  EXPECT_EQ(j["dim_qubit"], 2);
  EXPECT_EQ(j["re"].size(), 36u);
  const auto back = operator_from_json(json::parse(j.dump()));
  EXPECT_LE(max_abs(back.matrix() - op.matrix()), 0.0);
}

TEST(OperatorJson, RowMajorLayout) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = cplx(5, -2);
  const json j = operator_to_json(ComplexOperator(1, 2, m));
  EXPECT_EQ(j["re"][1], 5.0);
  EXPECT_EQ(j["im"][1], -2.0);
}

TEST(OperatorJson, RejectsWrongLength) {
  json j{{"dim_qubit", 1}, {"dim_fock", 2}, {"re", {1, 0, 0}}, {"im", {0, 0, 0}}};
  EXPECT_ERRC(operator_from_json(j), Errc::invalid_dimension);
}

TEST(StateJson, RoundTrip) {
  std::mt19937_64 rng(4);
  const auto s = QuantumState::density(1, 4, random_density(rng, 4));
  const auto back = state_from_json(state_to_json(s));
  EXPECT_LE(max_abs(back.density_matrix() - s.density_matrix()), 0.0);
}

TEST(JsonFile, ParseErrorCarriesLocation) {
  const auto p = scratch("bad.json");
  write_text_file(p, "{\n  \"a\": 1,\n  \"b\": ,\n}\n");
  try {
    read_json_file(p);
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::config_parse);
    EXPECT_NE(std::string(e.what()).find("bad.json:3"), std::string::npos) << e.what();
  }
}

TEST(JsonFile, MissingFileIsIoError) { EXPECT_ERRC(read_json_file(scratch("nope.json")), Errc::io); }

TEST(Csv, RoundTripShortestDoubles) {
  CsvTable t{{"t_s", "p_excited"}, {{0.0, 0.1}, {1e-7, 1.0 / 3.0}}};
  const std::string text = to_csv(t);
  EXPECT_EQ(text.substr(0, 16), "t_s,p_excited\n0,");
  const CsvTable back = parse_csv(text);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.rows[1][1], 1.0 / 3.0);
}

TEST(Csv, BadNumberReportsLine) {
  try {
    parse_csv("a,b\n1,2\n3,x\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::config_parse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(DeviceConfig, ReferenceRoundTrip) {
  const auto ref = DeviceParams::reference();
  const auto back = device_params_from_json(device_params_to_json(ref));
  EXPECT_NEAR(back.g, ref.g, 1e-9);
  EXPECT_NEAR(back.t2_p, ref.t2_p, 1e-18);
  ASSERT_TRUE(back.operating_delta.has_value());
  EXPECT_NEAR(*back.operating_delta, *ref.operating_delta, 1e-6);
}

TEST(DeviceConfig, UnknownKeyNamed) {
  json j = device_params_to_json(DeviceParams::reference());
  j["g_mhz"] = 0.28;
  try {
    device_params_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::config_parse);
    EXPECT_NE(std::string(e.what()).find("g_mhz"), std::string::npos);
  }
}

TEST(DeviceConfig, MissingKeyNamed) {
  json j = device_params_to_json(DeviceParams::reference());
  j.erase("t1_p_s");
  try {
    device_params_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("t1_p_s"), std::string::npos);
  }
}

TEST(DeviceConfig, InvalidPhysicsRejected) {
  json j = device_params_to_json(DeviceParams::reference());
  j["t2_p_s"] = 1e-3;  // > 2 T1
  try {
    device_params_from_json(j);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::config_parse);
    EXPECT_NE(std::string(e.what()).find("t2_p"), std::string::npos) << e.what();
  }
}
