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

#include "capauct/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "capauct/csv.hpp"
#include "capauct/error.hpp"
#include "capauct/random.hpp"

namespace capauct {
namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kAcceptTol = 1e-7;
// Consecutive degenerate pivots tolerated before switching to Bland's rule.
constexpr std::size_t kDegenerateRun = 50;
// Size of the anti-degeneracy right-hand-side shift, and the largest
// infeasibility its removal may leave behind.
constexpr double kShift = 1e-7;
constexpr double kShiftLimit = 1e-5;
// Basic values below -kCleanTol are repaired before a basis is reported.
constexpr double kCleanTol = 1e-12;

// Original column j equals offset + sign * y[plus] - y[minus] (minus < 0 when
// unused).
struct ColumnMap {
  double offset = 0.0;
  double sign = 1.0;
  long plus = -1;
  long minus = -1;
};

// max c.y  s.t.  A y <= b, y >= 0.
struct StandardForm {
  std::vector<double> a;  // row-major m x n
  std::vector<double> b;
  std::vector<double> c;
  double objective_offset = 0.0;
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<ColumnMap> columns;
};

StandardForm to_standard_form(const LinearProgram& lp) {
  StandardForm sf;
  const std::size_t nv = lp.num_vars();
  sf.columns.resize(nv);
  std::size_t n = 0;
  for (std::size_t j = 0; j < nv; ++j) {
    auto& cm = sf.columns[j];
    const double lo = lp.lower[j];
    const double hi = lp.upper[j];
    if (std::isfinite(lo)) {
      cm.offset = lo;
      cm.plus = static_cast<long>(n++);
    } else if (std::isfinite(hi)) {
      cm.offset = hi;
      cm.sign = -1.0;
      cm.plus = static_cast<long>(n++);
    } else {
      cm.plus = static_cast<long>(n++);
      cm.minus = static_cast<long>(n++);
    }
  }
  sf.n = n;
  sf.c.assign(n, 0.0);
  for (std::size_t j = 0; j < nv; ++j) {
    const auto& cm = sf.columns[j];
    sf.objective_offset += lp.objective[j] * cm.offset;
    sf.c[cm.plus] += cm.sign * lp.objective[j];
    if (cm.minus >= 0) sf.c[cm.minus] -= lp.objective[j];
  }

  auto emit = [&](const std::vector<double>& coeffs, double rhs, double flip) {
    const std::size_t base = sf.a.size();
    sf.a.resize(base + n, 0.0);
    double shifted = rhs;
    for (std::size_t j = 0; j < nv; ++j) {
      const double v = coeffs[j];
      if (v == 0.0) continue;
      const auto& cm = sf.columns[j];
      shifted -= v * cm.offset;
      sf.a[base + cm.plus] += flip * cm.sign * v;
      if (cm.minus >= 0) sf.a[base + cm.minus] -= flip * v;
    }
    sf.b.push_back(flip * shifted);
    ++sf.m;
  };

  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    switch (lp.senses[i]) {
      case Sense::kLessEqual: emit(lp.rows[i], lp.rhs[i], 1.0); break;
      case Sense::kGreaterEqual: emit(lp.rows[i], lp.rhs[i], -1.0); break;
      case Sense::kEqual:
        emit(lp.rows[i], lp.rhs[i], 1.0);
        emit(lp.rows[i], lp.rhs[i], -1.0);
        break;
    }
  }
  // Finite upper bounds on lower-shifted columns become rows.
  for (std::size_t j = 0; j < nv; ++j) {
    if (std::isfinite(lp.lower[j]) && std::isfinite(lp.upper[j])) {
      std::vector<double> unit(nv, 0.0);
      unit[j] = 1.0;
      emit(unit, lp.upper[j], 1.0);
    }
  }
  return sf;
}

enum class RunResult { kOptimal, kUnbounded };

// Condensed tableau: basic variable of row i equals b[i] - sum_j t(i,j) x_N(j);
// objective equals z0 + sum_j d[j] x_N(j). Variable ids: structural columns
// first, then one slack per row, then the phase-one artificial.
class Tableau {
 public:
  Tableau(const StandardForm& sf, bool with_artificial)
      : m_(sf.m), n_(sf.n + (with_artificial ? 1 : 0)), t_(m_ * n_, 0.0), b_(sf.b),
        d_(n_, 0.0), dead_(n_, false), basic_(m_), nonbasic_(n_) {
    for (std::size_t i = 0; i < m_; ++i) {
      std::copy_n(sf.a.begin() + static_cast<std::ptrdiff_t>(i * sf.n), sf.n, t_.begin() + static_cast<std::ptrdiff_t>(i * n_));
      if (with_artificial) at(i, n_ - 1) = -1.0;
      basic_[i] = sf.n + i;
    }
    for (std::size_t j = 0; j < sf.n; ++j) nonbasic_[j] = j;
    if (with_artificial) nonbasic_[n_ - 1] = sf.n + m_;
    structural_ = sf.n;
  }

  double& at(std::size_t i, std::size_t j) { return t_[i * n_ + j]; }
  double at(std::size_t i, std::size_t j) const { return t_[i * n_ + j]; }

  void pivot(std::size_t r, std::size_t s) {
    double* row_r = &t_[r * n_];
    const double p = row_r[s];
    if (std::abs(p) < 1e-12) throw NumericalBreakdown("pivot element below 1e-12");
    const double inv = 1.0 / p;
    for (std::size_t j = 0; j < n_; ++j) row_r[j] *= inv;
    row_r[s] = inv;
    b_[r] *= inv;
    if (perturbed_) e_[r] *= inv;
    for (std::size_t i = 0; i < m_; ++i) {
      if (i == r) continue;
      double* row_i = &t_[i * n_];
      const double f = row_i[s];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n_; ++j) row_i[j] -= f * row_r[j];
      row_i[s] = -f * inv;
      b_[i] -= f * b_[r];
      if (perturbed_) e_[i] -= f * e_[r];
    }
    const double f = d_[s];
    if (f != 0.0) {
      for (std::size_t j = 0; j < n_; ++j) d_[j] -= f * row_r[j];
      d_[s] = -f * inv;
      z0_ += f * b_[r];
    }
    std::swap(basic_[r], nonbasic_[s]);
  }

  // Maximizes the current objective row from a feasible basis. A long run of
  // degenerate pivots first triggers a small deterministic shift of the
  // right-hand side; a second run switches to the smallest-index rule until
  // progress resumes. The shift is removed before returning.
  RunResult run(bool pure_bland, std::size_t& iterations, std::size_t max_iterations) {
    for (int round = 0; round < 8; ++round) {
      const RunResult result = primal(pure_bland, iterations, max_iterations);
      if (result == RunResult::kUnbounded) return result;
      // The two-pass ratio test and the shift both leave small negative
      // basic values; dual pivots clear them.
      if (perturbed_) unperturb();
      dual(iterations, max_iterations);
      if (!has_entering(pure_bland)) return RunResult::kOptimal;
    }
    throw NumericalBreakdown("simplex failed to settle after removing the shift");
  }

  bool has_entering(bool) const {
    for (std::size_t j = 0; j < n_; ++j)
      if (!dead_[j] && d_[j] > kCostTol) return true;
    return false;
  }

  RunResult primal(bool pure_bland, std::size_t& iterations, std::size_t max_iterations) {
    std::size_t streak = 0;
    bool bland = pure_bland;
    bool may_perturb = !pure_bland;
    for (;;) {
      // Entering column.
      std::size_t s = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        if (dead_[j] || d_[j] <= kCostTol) continue;
        if (s == n_) { s = j; continue; }
        if (bland ? nonbasic_[j] < nonbasic_[s] : d_[j] > d_[s]) s = j;
      }
      if (s == n_) return RunResult::kOptimal;

      std::size_t r = m_;
      if (bland) {
        // Exact minimum ratio, smallest basic index on ties.
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m_; ++i) {
          const double a = at(i, s);
          if (a <= kPivotTol) continue;
          const double ratio = std::max(b_[i], 0.0) / a;
          if (r == m_ || ratio < best || (ratio == best && basic_[i] < basic_[r])) {
            r = i;
            best = ratio;
          }
        }
      } else {
        // Two-pass (Harris) test: bound the step with every row relaxed by
        // the feasibility tolerance, then take the largest pivot among rows
        // whose exact ratio fits under that bound.
        double bound = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m_; ++i) {
          const double a = at(i, s);
          if (a > kPivotTol) bound = std::min(bound, (std::max(b_[i], 0.0) + kFeasTol) / a);
        }
        for (std::size_t i = 0; i < m_; ++i) {
          const double a = at(i, s);
          if (a <= kPivotTol || std::max(b_[i], 0.0) / a > bound) continue;
          if (r == m_ || a > at(r, s)) r = i;
        }
      }
      if (r == m_) return RunResult::kUnbounded;

      const bool degenerate = b_[r] <= kFeasTol;
      pivot(r, s);
      if (++iterations > max_iterations)
        throw NumericalBreakdown("simplex iteration limit exceeded");
      if (pure_bland) continue;
      if (!degenerate) {
        streak = 0;
        bland = false;
      } else if (++streak >= kDegenerateRun) {
        streak = 0;
        if (may_perturb) {
          perturb();
          may_perturb = false;
        } else {
          bland = true;
        }
      }
    }
  }

  void perturb() {
    perturbed_ = true;
    e_.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      // Deterministic spread in [1, 2) keyed by the basic variable.
      const double u = static_cast<double>(mix64(basic_[i] + 1) >> 11) * 0x1.0p-53;
      e_[i] = kShift * (1.0 + u) * std::max(1.0, std::abs(b_[i]));
      b_[i] += e_[i];
    }
  }

  void unperturb() {
    for (std::size_t i = 0; i < m_; ++i) b_[i] -= e_[i];
    perturbed_ = false;
    e_.clear();
  }

  // Dual simplex passes restoring b >= 0 while keeping d <= 0.
  void dual(std::size_t& iterations, std::size_t max_iterations) {
    for (;;) {
      std::size_t r = m_;
      for (std::size_t i = 0; i < m_; ++i)
        if (b_[i] < -kCleanTol && (r == m_ || b_[i] < b_[r])) r = i;
      if (r == m_) break;
      double bound = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n_; ++j) {
        const double a = at(r, j);
        if (dead_[j] || a >= -kPivotTol) continue;
        bound = std::min(bound, (std::max(-d_[j], 0.0) + kCostTol) / -a);
      }
      std::size_t s = n_;
      for (std::size_t j = 0; j < n_; ++j) {
        const double a = at(r, j);
        if (dead_[j] || a >= -kPivotTol || std::max(-d_[j], 0.0) / -a > bound) continue;
        if (s == n_ || a < at(r, s)) s = j;
      }
      if (s == n_) {
        // No column can repair the row; only round-off can leave it this way.
        if (b_[r] < -kShiftLimit) throw NumericalBreakdown("row stays infeasible after shift removal");
        b_[r] = 0.0;
        continue;
      }
      pivot(r, s);
      if (++iterations > max_iterations)
        throw NumericalBreakdown("simplex iteration limit exceeded");
    }
  }

  std::size_t m_;
  std::size_t n_;
  std::size_t structural_ = 0;
  std::vector<double> t_;
  std::vector<double> b_;
  std::vector<double> d_;
  std::vector<bool> dead_;
  std::vector<std::size_t> basic_;
  std::vector<std::size_t> nonbasic_;
  double z0_ = 0.0;
  bool perturbed_ = false;
  std::vector<double> e_;
};

LpSolution solve_once(const LinearProgram& lp, const StandardForm& sf, bool pure_bland) {
  LpSolution sol;
  const bool needs_phase_one =
      std::any_of(sf.b.begin(), sf.b.end(), [](double v) { return v < -kFeasTol; });
  Tableau tab(sf, needs_phase_one);
  const std::size_t art_id = sf.n + sf.m;
  const std::size_t max_iter = 200 * (tab.m_ + tab.n_) + 10000;

  if (needs_phase_one) {
    const std::size_t art_col = tab.n_ - 1;
    tab.d_[art_col] = -1.0;  // maximize -artificial
    std::size_t r = 0;
    for (std::size_t i = 1; i < tab.m_; ++i)
      if (tab.b_[i] < tab.b_[r]) r = i;
    tab.pivot(r, art_col);
    ++sol.iterations;
    tab.run(pure_bland, sol.iterations, max_iter);
    double scale = 1.0;
    for (double v : sf.b) scale = std::max(scale, std::abs(v));
    double residual = 0.0;
    for (std::size_t i = 0; i < tab.m_; ++i)
      if (tab.basic_[i] == art_id) residual = tab.b_[i];
    if (residual > 1e-8 * scale) {
      sol.status = LpStatus::kInfeasible;
      return sol;
    }
    // Drive the artificial out of the basis, or retire its column.
    for (std::size_t i = 0; i < tab.m_; ++i) {
      if (tab.basic_[i] != art_id) continue;
      std::size_t s = tab.n_;
      double mag = kPivotTol;
      for (std::size_t j = 0; j < tab.n_; ++j) {
        if (tab.dead_[j]) continue;
        if (std::abs(tab.at(i, j)) > mag) { mag = std::abs(tab.at(i, j)); s = j; }
      }
      if (s < tab.n_) {
        tab.b_[i] = 0.0;
        tab.pivot(i, s);
      } else {
        // Redundant row: zero it so it never constrains a ratio test.
        for (std::size_t j = 0; j < tab.n_; ++j) tab.at(i, j) = 0.0;
        tab.b_[i] = 0.0;
      }
    }
    for (std::size_t j = 0; j < tab.n_; ++j)
      if (tab.nonbasic_[j] == art_id) tab.dead_[j] = true;
  }

  // Phase-two objective expressed in the current nonbasic columns.
  std::fill(tab.d_.begin(), tab.d_.end(), 0.0);
  tab.z0_ = 0.0;
  std::vector<long> col_of(sf.n + sf.m + 1, -1);
  for (std::size_t j = 0; j < tab.n_; ++j) col_of[tab.nonbasic_[j]] = static_cast<long>(j);
  for (std::size_t j = 0; j < tab.n_; ++j)
    if (tab.nonbasic_[j] < sf.n) tab.d_[j] += sf.c[tab.nonbasic_[j]];
  for (std::size_t i = 0; i < tab.m_; ++i) {
    const std::size_t var = tab.basic_[i];
    if (var >= sf.n) continue;
    const double c = sf.c[var];
    if (c == 0.0) continue;
    tab.z0_ += c * tab.b_[i];
    for (std::size_t j = 0; j < tab.n_; ++j) tab.d_[j] -= c * tab.at(i, j);
  }
  for (std::size_t j = 0; j < tab.n_; ++j)
    if (tab.dead_[j]) tab.d_[j] = 0.0;

  if (tab.run(pure_bland, sol.iterations, max_iter) == RunResult::kUnbounded) {
    sol.status = LpStatus::kUnbounded;
    return sol;
  }

  std::vector<double> y(sf.n, 0.0);
  for (std::size_t i = 0; i < tab.m_; ++i)
    if (tab.basic_[i] < sf.n) y[tab.basic_[i]] = std::max(tab.b_[i], 0.0);
  sol.assignment.resize(lp.num_vars());
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    const auto& cm = sf.columns[j];
    double x = cm.offset + cm.sign * y[cm.plus];
    if (cm.minus >= 0) x -= y[cm.minus];
    sol.assignment[j] = x;
  }
  sol.objective_value = 0.0;
  for (std::size_t j = 0; j < lp.num_vars(); ++j)
    sol.objective_value += lp.objective[j] * sol.assignment[j];
  sol.status = LpStatus::kOptimal;
  return sol;
}

}  // namespace

LinearProgram::LinearProgram(std::size_t num_vars)
    : objective(num_vars, 0.0), lower(num_vars, 0.0), upper(num_vars, std::numeric_limits<double>::infinity()) {}

void LinearProgram::add_row(std::vector<double> coefficients, Sense sense, double rhs_value) {
  if (coefficients.size() != num_vars()) throw LengthMismatch("row length must equal num_vars");
  rows.push_back(std::move(coefficients));
  senses.push_back(sense);
  rhs.push_back(rhs_value);
}

void LinearProgram::validate() const {
  const std::size_t n = num_vars();
  if (rows.size() != senses.size() || rows.size() != rhs.size())
    throw LengthMismatch("rows, senses and rhs must have equal length");
  if (lower.size() != n || upper.size() != n) throw LengthMismatch("bounds must cover every column");
  if (!names.empty() && names.size() != n) throw LengthMismatch("names must cover every column");
  for (std::size_t j = 0; j < n; ++j) {
    if (!std::isfinite(objective[j])) throw InvalidArgument("non-finite objective coefficient");
    if (!(lower[j] <= upper[j])) throw InvalidArgument("lower bound exceeds upper bound");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != n) throw LengthMismatch("row length must equal num_vars");
    if (!std::isfinite(rhs[i])) throw InvalidArgument("non-finite right-hand side");
    for (double v : rows[i])
      if (!std::isfinite(v)) throw InvalidArgument("non-finite constraint coefficient");
  }
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
  }
  return "unknown";
}

double max_violation(const LinearProgram& lp, const std::vector<double>& x) {
  double worst = 0.0;
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < lp.num_vars(); ++j) lhs += lp.rows[i][j] * x[j];
    const double gap = lhs - lp.rhs[i];
    switch (lp.senses[i]) {
      case Sense::kLessEqual: worst = std::max(worst, gap); break;
      case Sense::kGreaterEqual: worst = std::max(worst, -gap); break;
      case Sense::kEqual: worst = std::max(worst, std::abs(gap)); break;
    }
  }
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    worst = std::max(worst, lp.lower[j] - x[j]);
    worst = std::max(worst, x[j] - lp.upper[j]);
  }
  return worst;
}

LpSolution solve_simplex(const LinearProgram& lp) {
  lp.validate();
  const StandardForm sf = to_standard_form(lp);
  if (sf.m == 0) {
    // Only sign constraints: optimal at the shifted origin unless a cost is positive.
    for (double c : sf.c)
      if (c > kCostTol) return LpSolution{LpStatus::kUnbounded, 0.0, {}, 0};
  }
  double scale = 1.0;
  for (double v : sf.b) scale = std::max(scale, std::abs(v));

  LpSolution sol = solve_once(lp, sf, false);
  if (sol.status != LpStatus::kOptimal || max_violation(lp, sol.assignment) <= kAcceptTol * scale)
    return sol;
  // Accumulated round-off: rebuild the tableau from the original data and
  // re-solve with the smallest-index rule throughout.
  sol = solve_once(lp, sf, true);
  if (sol.status == LpStatus::kOptimal && max_violation(lp, sol.assignment) > kAcceptTol * scale)
    throw NumericalBreakdown("solution violates constraints after re-solve");
  return sol;
}

void write_lp_text(std::ostream& os, const LinearProgram& lp) {
  auto name = [&](std::size_t j) {
    return lp.names.empty() ? "x" + std::to_string(j) : lp.names[j];
  };
  os << "MAXIMIZE\n";
  for (std::size_t j = 0; j < lp.num_vars(); ++j)
    if (lp.objective[j] != 0.0)
      os << "  " << csv::format_number(lp.objective[j]) << ' ' << name(j) << '\n';
  os << "SUBJECT TO\n";
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    os << "  r" << i << ':';
    for (std::size_t j = 0; j < lp.num_vars(); ++j)
      if (lp.rows[i][j] != 0.0) os << ' ' << csv::format_number(lp.rows[i][j]) << ' ' << name(j);
    const char* op = lp.senses[i] == Sense::kLessEqual ? "<=" : lp.senses[i] == Sense::kEqual ? "=" : ">=";
    os << ' ' << op << ' ' << csv::format_number(lp.rhs[i]) << '\n';
  }
  os << "BOUNDS\n";
  for (std::size_t j = 0; j < lp.num_vars(); ++j)
    os << "  " << csv::format_number(lp.lower[j]) << " <= " << name(j) << " <= "
       << csv::format_number(lp.upper[j]) << '\n';
  os << "END\n";
}

}  // namespace capauct
