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
#include <vector>

namespace capauct {

/// Interim win probability x on an ascending value grid.
struct InterimAllocation {
  std::vector<double> grid;
  std::vector<double> x;

  std::size_t size() const { return grid.size(); }
  /// Shape and range checks; monotonicity is checked by the payment rules.
  void validate() const;
  bool is_monotone(double tol = 1e-12) const;
};

/// Interim expected payment on a value grid.
struct PaymentCurve {
  std::vector<double> grid;
  std::vector<double> p;
};

/// p(v) = v x(v) - int_0^v x, trapezoid on the grid. Below grid[0] the
/// allocation is taken as constant at x(grid[0]).
PaymentCurve risk_neutral_payment(const InterimAllocation& a);

/// (v - C) x(v). Zero wherever x is zero, including for infinite C.
PaymentCurve value_minus_capacity_floor(const InterimAllocation& a, double capacity);

/// Equilibrium payment of the one-priced mechanism implementing `a` for agents
/// with capacity C: p(v_k) = max(p_vc(v_k), p_rn(v_k) + M_k), where M_k is the
/// running maximum of p - p_rn over lower grid points and the origin.
PaymentCurve capacitated_payment(const InterimAllocation& a, double capacity);

/// Piecewise-linear bid as a function of value, built from p / x at grid
/// points where x > 0.
class BidCurve {
 public:
  BidCurve() = default;
  BidCurve(std::vector<double> values, std::vector<double> bids);

  /// Linear between knots; outside them the end segments extend, never
  /// exceeding v.
  double operator()(double v) const;

  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& bids() const { return bids_; }
  bool empty() const { return values_.empty(); }

 private:
  std::vector<double> values_;
  std::vector<double> bids_;
};

/// Throws ZeroAllocation when x is zero on the whole grid.
BidCurve bid_function(const InterimAllocation& a, double capacity);

/// Rows `value,x,p_rn,p_vc,p_cap,bid`; bid is nan where x = 0.
void write_payment_csv(std::ostream& os, const InterimAllocation& a, double capacity);

}  // namespace capauct
