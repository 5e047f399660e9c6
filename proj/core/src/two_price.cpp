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

#include "capauct/two_price.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "capauct/error.hpp"
#include "capauct/csv.hpp"

namespace capauct {
namespace {

constexpr double kTol = 1e-9;

void check_grid(std::span<const double> grid) {
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw InvalidArgument("grid must be strictly increasing");
}

std::size_t grid_index(std::span<const double> grid, double v) {
  auto it = std::lower_bound(grid.begin(), grid.end(), v);
  const double scale = std::max(1.0, std::abs(v));
  if (it != grid.end() && std::abs(*it - v) <= 1e-12 * scale)
    return static_cast<std::size_t>(it - grid.begin());
  if (it != grid.begin() && std::abs(*(it - 1) - v) <= 1e-12 * scale)
    return static_cast<std::size_t>(it - grid.begin()) - 1;
  throw ReportNotOnGrid("value is not a grid point");
}

double payment_at(double v, double qv, double qc, double capacity) {
  if (std::isinf(capacity)) return v * qv;
  return v * (qv + qc) - capacity * qc;
}

}  // namespace

void TwoPricedRule::validate() const {
  if (qv.size() != grid.size() || qc.size() != grid.size())
    throw LengthMismatch("grid, qv and qc must have equal length");
  if (!(capacity > 0.0)) throw InvalidArgument("capacity must be positive");
  check_grid(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (qv[i] < -kTol || qc[i] < -kTol || qv[i] + qc[i] > 1.0 + kTol)
      throw InvalidArgument("qv, qc must be probabilities with qv + qc <= 1");
    if (std::isinf(capacity) && qc[i] > kTol)
      throw InvalidArgument("qc must vanish when the capacity is infinite");
  }
}

std::vector<double> TwoPricedRule::payments() const {
  std::vector<double> p(size());
  for (std::size_t i = 0; i < size(); ++i) p[i] = payment_at(grid[i], qv[i], qc[i], capacity);
  return p;
}

std::vector<double> TransformedRule::payments() const {
  std::vector<double> p(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    p[i] = payment_at(grid[i], qv[i], qc[i], capacity);
  return p;
}

double utility_of_report_index(const TwoPricedRule& rule, double true_value,
                               std::size_t report_index) {
  const double r = rule.grid[report_index];
  const double c = rule.capacity;
  const double full = rule.qv[report_index] * capped_utility(true_value - r, c);
  if (std::isinf(c)) return full;
  return full + rule.qc[report_index] * capped_utility(true_value - r + c, c);
}

double utility_of_report(const TwoPricedRule& rule, double true_value, double report) {
  return utility_of_report_index(rule, true_value, grid_index(rule.grid, report));
}

BicVerdict check_bic(const TwoPricedRule& rule, double tol) {
  rule.validate();
  BicVerdict verdict;
  const std::size_t n = rule.size();
  std::vector<double> truthful(n);
  for (std::size_t i = 0; i < n; ++i) truthful[i] = utility_of_report_index(rule, rule.grid[i], i);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double slack = truthful[i] - utility_of_report_index(rule, rule.grid[i], j);
      if (slack < -tol) verdict.violations.push_back({i, j, slack});
    }
  }
  return verdict;
}

double expected_payment(const TwoPricedRule& rule, std::span<const double> masses) {
  if (masses.size() != rule.size()) throw LengthMismatch("masses must align with the grid");
  double total = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    total += masses[i] * payment_at(rule.grid[i], rule.qv[i], rule.qc[i], rule.capacity);
  return total;
}

double step_integral(std::span<const double> grid, std::span<const double> f, double a,
                     double b) {
  if (grid.size() != f.size()) throw LengthMismatch("step function length mismatch");
  if (grid.empty() || b <= a) return 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double left = std::max(a, grid[j]);
    const double right = std::min(b, j + 1 < grid.size() ? grid[j + 1] : kInf);
    if (right > left) total += f[j] * (right - left);
  }
  return total;
}

TransformedRule qbar_transform(const TwoPricedRule& rule) {
  rule.validate();
  TransformedRule out;
  out.grid = rule.grid;
  out.qv = rule.qv;
  out.capacity = rule.capacity;
  const std::size_t n = rule.size();
  out.chi.resize(n);
  out.qc.resize(n);
  const double c = rule.capacity;
  double running = 0.0;
  double integral = 0.0;  // of chi from 0 up to grid[i]
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) integral += out.chi[i - 1] * (rule.grid[i] - rule.grid[i - 1]);
    running = std::max(running, rule.qv[i]);
    out.chi[i] = std::isinf(c) ? 0.0 : running / c;
    out.qc[i] = rule.grid[i] <= c ? integral : rule.qc[i];
  }
  return out;
}

PaymentBound payment_upper_bound(const TwoPricedRule& rule, const DiscreteTypeSpace& space,
                                 const ValueDistribution* parent) {
  rule.validate();
  space.validate();
  if (space.size() != rule.size()) throw LengthMismatch("rule and type space differ in size");
  for (std::size_t i = 0; i < rule.size(); ++i)
    if (std::abs(space.values[i] - rule.grid[i]) > 1e-12 * std::max(1.0, std::abs(rule.grid[i])))
      throw InvalidArgument("rule grid must equal the type space values");

  std::vector<double> phi;
  if (parent != nullptr) {
    phi.reserve(rule.size());
    for (double v : rule.grid) phi.push_back(virtual_value(*parent, v));
  } else {
    phi = discrete_virtual_values(space);
  }
  PaymentBound bound;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double m = space.masses[i];
    const double phi_plus = std::max(phi[i], 0.0);
    const double q = rule.qv[i] + rule.qc[i];
    const double excess = std::isinf(rule.capacity) ? 0.0 : std::max(rule.grid[i] - rule.capacity, 0.0);
    bound.parts[0] += m * phi_plus * q;
    bound.parts[1] += m * phi_plus * rule.qc[i];
    bound.parts[2] += m * excess * rule.qc[i];
  }
  bound.total = bound.parts[0] + bound.parts[1] + bound.parts[2];
  return bound;
}

PaymentParts decomposition(const TransformedRule& rule, double v) {
  const std::size_t i = grid_index(rule.grid, v);
  const double c = rule.capacity;
  std::vector<double> q(rule.grid.size());
  for (std::size_t j = 0; j < q.size(); ++j) q[j] = rule.qv[j] + rule.qc[j];
  PaymentParts parts;
  parts.p1 = q[i] * v - step_integral(rule.grid, q, 0.0, v);
  parts.p2 = step_integral(rule.grid, rule.qc, 0.0, std::min(v, c));
  parts.p3 = v <= c ? 0.0 : step_integral(rule.grid, rule.qc, c, v);
  return parts;
}

TwoPricedRule two_priced_from_one_priced(std::span<const double> grid,
                                         std::span<const double> win_probability,
                                         std::span<const double> price_on_win,
                                         double capacity) {
  if (win_probability.size() != grid.size() || price_on_win.size() != grid.size())
    throw LengthMismatch("grid, allocation and price must align");
  TwoPricedRule rule;
  rule.grid.assign(grid.begin(), grid.end());
  if (std::isinf(capacity)) {
    double top = 1.0;
    for (double v : grid) top = std::max(top, std::abs(v));
    capacity = 1e6 * top;
  }
  rule.capacity = capacity;
  rule.qv.resize(grid.size());
  rule.qc.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = win_probability[i];
    const double wealth = grid[i] - price_on_win[i];
    if (x > 0.0 && wealth < -kTol * std::max(1.0, std::abs(grid[i])))
      throw InvalidArgument("price on winning exceeds the value");
    const double share = std::clamp(wealth, 0.0, capacity) / capacity;
    rule.qc[i] = x * share;
    rule.qv[i] = x - rule.qc[i];
  }
  rule.validate();
  return rule;
}

TwoPricedRule posted_price_rule(const DiscreteTypeSpace& space, double capacity) {
  space.validate();
  const std::size_t n = space.size();
  // Revenue of posting v_i is v_i * P(v >= v_i).
  std::size_t best = 0;
  double best_revenue = -1.0;
  double tail = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double revenue = space.values[i] * tail;
    if (revenue > best_revenue + 1e-15) {
      best_revenue = revenue;
      best = i;
    }
    tail -= space.masses[i];
  }
  std::vector<double> x(n, 0.0);
  std::vector<double> price(n, space.values[best]);
  for (std::size_t i = best; i < n; ++i) x[i] = 1.0;
  return two_priced_from_one_priced(space.values, x, price, capacity);
}

void write_rule_csv(std::ostream& os, const TwoPricedRule& rule) {
  csv::Writer w(os);
  w.header({"value", "qv", "qc"});
  for (std::size_t i = 0; i < rule.size(); ++i) w.row({rule.grid[i], rule.qv[i], rule.qc[i]});
}

TwoPricedRule read_rule_csv(std::istream& is, double capacity) {
  const csv::Table table = csv::read(is);
  TwoPricedRule rule;
  rule.capacity = capacity;
  rule.grid = table.column("value");
  rule.qv = table.column("qv");
  rule.qc = table.column("qc");
  rule.validate();
  return rule;
}

std::string rule_metadata_json(const TwoPricedRule& rule) {
  nlohmann::json j;
  j["capacity"] = std::isinf(rule.capacity) ? nlohmann::json("inf") : nlohmann::json(rule.capacity);
  j["grid_size"] = rule.size();
  j["columns"] = {"value", "qv", "qc"};
  return j.dump(2);
}

double capacity_from_metadata_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const auto& c = j.at("capacity");
  if (c.is_string()) {
    if (c.get<std::string>() == "inf") return kInf;
    throw InvalidArgument("capacity must be a number or \"inf\"");
  }
  return c.get<double>();
}

}  // namespace capauct
