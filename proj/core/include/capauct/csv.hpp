// Copyright 2026 The capauct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal CSV support for the numeric tables the library emits.

#pragma once

#include <cstdio>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "capauct/error.hpp"

namespace capauct::csv {

inline std::string format_number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  void header(std::initializer_list<std::string> names) {
    bool first = true;
    for (const auto& n : names) {
      os_ << (first ? "" : ",") << n;
      first = false;
    }
    os_ << '\n';
  }

  void row(std::initializer_list<double> cells) {
    bool first = true;
    for (double c : cells) {
      os_ << (first ? "" : ",") << format_number(c);
      first = false;
    }
    os_ << '\n';
  }

 private:
  std::ostream& os_;
};

struct Table {
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> rows;

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return i;
    throw InvalidArgument("missing CSV column '" + name + "'");
  }

  std::vector<double> column(const std::string& name) const {
    const std::size_t c = index_of(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(std::stod(r.at(c)));
    return out;
  }
};

inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline Table read(std::istream& is) {
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("CSV is empty; a header row is required");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.names = split(line);
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.names.size()) throw InvalidArgument("ragged CSV row");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace capauct::csv
