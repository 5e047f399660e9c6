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

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "capauct/dist.hpp"

namespace capauct {

/// Interim two-priced allocation for one agent: on each grid type the agent
/// pays her full value with probability qv and value minus capacity with
/// probability qc.
struct TwoPricedRule {
  std::vector<double> grid;
  std::vector<double> qv;
  std::vector<double> qc;
  double capacity = kInf;

  std::size_t size() const { return grid.size(); }
  /// Throws on broken shape or probability invariants (tolerance 1e-9).
  void validate() const;
  /// Interim expected payment v q(v) - C qc(v) on each grid point.
  std::vector<double> payments() const;
};

/// Output of the q-bar transform. `qc` holds the transformed qc; `qv` is
/// copied unchanged; chi is the running supremum of qv / C.
struct TransformedRule {
  std::vector<double> grid;
  std::vector<double> qv;
  std::vector<double> qc;
  std::vector<double> chi;
  double capacity = kInf;

  std::vector<double> payments() const;
};

/// u_C(z) = min(z, C). Negative wealth is not floored.
inline double capped_utility(double wealth, double capacity) {
  return wealth < capacity ? wealth : capacity;
}

/// Expected capacitated utility of a type with `true_value` reporting
/// `report`, which must be a grid point.
double utility_of_report(const TwoPricedRule& rule, double true_value, double report);
double utility_of_report_index(const TwoPricedRule& rule, double true_value,
                               std::size_t report_index);

struct IcViolation {
  std::size_t true_index = 0;
  std::size_t report_index = 0;
  /// U(truthful) - U(report); negative for a violation.
  double slack = 0.0;
};

struct BicVerdict {
  std::vector<IcViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Direct utility comparison over every ordered pair of grid types.
BicVerdict check_bic(const TwoPricedRule& rule, double tol = 1e-9);

double expected_payment(const TwoPricedRule& rule, std::span<const double> masses);

TransformedRule qbar_transform(const TwoPricedRule& rule);

/// Integral of the right-continuous step function that takes f[j] on
/// [grid[j], grid[j+1]), zero below grid[0] and f.back() above the last point.
double step_integral(std::span<const double> grid, std::span<const double> f, double a,
                     double b);

struct PaymentBound {
  double total = 0.0;
  /// E[phi+ q], E[phi+ qc], E[(v - C)+ qc].
  std::array<double, 3> parts{};
};

/// Three-term upper bound on expected payment. Virtual values come from
/// `parent` when given, else from the discrete hazard of the type space.
PaymentBound payment_upper_bound(const TwoPricedRule& rule, const DiscreteTypeSpace& space,
                                 const ValueDistribution* parent = nullptr);

struct PaymentParts {
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  double total() const { return p1 + p2 + p3; }
};

/// Area-above-q-bar, area-below-q-bar-c up to C, and the remainder beyond C,
/// at grid value v.
PaymentParts decomposition(const TransformedRule& rule, double v);

/// Converts a one-priced interim outcome (win probability x, price on winning)
/// into a two-priced rule giving every type the same capped utility. The
/// wealth left after the price becomes a lottery between paying v and v - C;
/// wealth above C is worthless to the agent and is charged, so revenue only
/// rises. An infinite capacity is replaced by 1e6 max(1, |v|max), which
/// reproduces the one-priced payments exactly.
TwoPricedRule two_priced_from_one_priced(std::span<const double> grid,
                                         std::span<const double> win_probability,
                                         std::span<const double> price_on_win,
                                         double capacity);

/// Best posted price on a discrete type space, encoded as a two-priced rule.
TwoPricedRule posted_price_rule(const DiscreteTypeSpace& space, double capacity);

/// CSV with header `value,qv,qc`.
void write_rule_csv(std::ostream& os, const TwoPricedRule& rule);
TwoPricedRule read_rule_csv(std::istream& is, double capacity);
/// Sidecar metadata carrying the capacity.
std::string rule_metadata_json(const TwoPricedRule& rule);
double capacity_from_metadata_json(const std::string& text);

}  // namespace capauct
