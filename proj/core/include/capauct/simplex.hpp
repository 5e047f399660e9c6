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

#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace capauct {

enum class Sense { kLessEqual, kEqual, kGreaterEqual };

/// Dense LP: maximize objective . x subject to rows[i] . x (sense) rhs[i] and
/// lower <= x <= upper. Infinite bounds are allowed.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<Sense> senses;
  std::vector<double> rhs;
  std::vector<double> lower;
  std::vector<double> upper;
  /// Optional column names used by the text dump.
  std::vector<std::string> names;

  explicit LinearProgram(std::size_t num_vars = 0);

  std::size_t num_vars() const { return objective.size(); }
  std::size_t num_rows() const { return rows.size(); }

  void add_row(std::vector<double> coefficients, Sense sense, double rhs_value);
  void validate() const;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

const char* to_string(LpStatus status);

struct LpSolution {
  LpStatus status = LpStatus::kInfeasible;
  double objective_value = 0.0;
  std::vector<double> assignment;
  std::size_t iterations = 0;
};

/// Two-phase simplex on a condensed (nonbasic-column) dense tableau.
/// Entering columns use the largest reduced cost; after a run of degenerate
/// pivots the rule falls back to Bland's smallest-index rule until progress
/// resumes, which rules out cycling. Pivoting is deterministic.
LpSolution solve_simplex(const LinearProgram& lp);

/// Largest violation of any row or bound by `x`, in absolute terms.
double max_violation(const LinearProgram& lp, const std::vector<double>& x);

/// Plain-text dump: objective, one line per row, one line per bounded column.
void write_lp_text(std::ostream& os, const LinearProgram& lp);

}  // namespace capauct
