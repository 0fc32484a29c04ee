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

#include "mechq/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "mechq/error.hpp"

namespace mechq {

json operator_to_json(const ComplexOperator& op) {
  const Matrix& m = op.matrix();
  std::vector<double> re, im;
  re.reserve(m.size());
  im.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  return json{{"dim_qubit", op.dim_qubit()}, {"dim_fock", op.dim_fock()}, {"re", re}, {"im", im}};
}

ComplexOperator operator_from_json(const json& j) {
  try {
    const int dq = j.at("dim_qubit").get<int>();
    const int df = j.at("dim_fock").get<int>();
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    const long d = static_cast<long>(dq) * df;
    if (d <= 0 || static_cast<long>(re.size()) != d * d || re.size() != im.size())
      throw Error(Errc::invalid_dimension, "matrix arrays do not match dim_qubit*dim_fock squared");
    Matrix m(d, d);
    for (long r = 0; r < d; ++r)
      for (long c = 0; c < d; ++c) m(r, c) = cplx(re[r * d + c], im[r * d + c]);
    return ComplexOperator(dq, df, std::move(m));
  } catch (const json::exception& e) {
    throw Error(Errc::config_parse, std::string("matrix json: ") + e.what());
  }
}

json state_to_json(const QuantumState& state) {
  json j = operator_to_json(ComplexOperator(state.dim_qubit(), state.dim_fock(), state.density_matrix()));
  j["kind"] = "density";
  return j;
}

QuantumState state_from_json(const json& j) {
  const ComplexOperator op = operator_from_json(j);
  return QuantumState::density(op.dim_qubit(), op.dim_fock(), op.matrix());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // byte offset -> line/column
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(Errc::config_parse, path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                                        e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

std::string to_csv(const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_double(row[i]);
    }
    out += '\n';
  }
  return out;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (table.header.empty()) {
      table.header = cells;
      continue;
    }
    if (cells.size() != table.header.size())
      throw Error(Errc::config_parse, "csv line " + std::to_string(lineno) + ": expected " +
                                          std::to_string(table.header.size()) + " columns");
    std::vector<double> row;
    for (const auto& c : cells) {
      double v = 0;
      auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || p != c.data() + c.size())
        throw Error(Errc::config_parse, "csv line " + std::to_string(lineno) + ": bad number '" + c + "'");
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace mechq
