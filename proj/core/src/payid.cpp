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

#include "capauct/payid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "capauct/csv.hpp"
#include "capauct/error.hpp"

namespace capauct {
namespace {

void require_monotone(const InterimAllocation& a) {
  a.validate();
  if (!a.is_monotone()) throw NonMonotoneAllocation("interim allocation decreases on the grid");
}

}  // namespace

void InterimAllocation::validate() const {
  if (grid.size() != x.size()) throw LengthMismatch("grid and x differ in length");
  if (grid.empty()) throw InvalidArgument("empty allocation grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0.0) throw InvalidArgument("grid values must be finite and >= 0");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InvalidArgument("grid must be strictly increasing");
    if (!(x[i] >= 0.0 && x[i] <= 1.0)) throw InvalidArgument("allocation outside [0,1]");
  }
}

bool InterimAllocation::is_monotone(double tol) const {
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] < x[i - 1] - tol) return false;
  return true;
}

PaymentCurve risk_neutral_payment(const InterimAllocation& a) {
  require_monotone(a);
  PaymentCurve out{a.grid, std::vector<double>(a.size())};
  double area = a.grid[0] * a.x[0];
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i > 0) area += 0.5 * (a.x[i] + a.x[i - 1]) * (a.grid[i] - a.grid[i - 1]);
    out.p[i] = a.grid[i] * a.x[i] - area;
  }
  return out;
}

PaymentCurve value_minus_capacity_floor(const InterimAllocation& a, double capacity) {
  a.validate();
  PaymentCurve out{a.grid, std::vector<double>(a.size())};
  for (std::size_t i = 0; i < a.size(); ++i)
    out.p[i] = a.x[i] == 0.0 ? 0.0 : (a.grid[i] - capacity) * a.x[i];
  return out;
}

PaymentCurve capacitated_payment(const InterimAllocation& a, double capacity) {
  if (!(capacity > 0.0)) throw InvalidArgument("capacity must be positive");
  const PaymentCurve rn = risk_neutral_payment(a);
  const PaymentCurve vc = value_minus_capacity_floor(a, capacity);
  PaymentCurve out{a.grid, std::vector<double>(a.size())};
  // The origin contributes p - p_rn = 0 to the running maximum.
  double offset = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.p[i] = std::max(vc.p[i], rn.p[i] + offset);
    offset = std::max(offset, out.p[i] - rn.p[i]);
  }
  return out;
}

BidCurve::BidCurve(std::vector<double> values, std::vector<double> bids)
    : values_(std::move(values)), bids_(std::move(bids)) {
  if (values_.size() != bids_.size()) throw LengthMismatch("bid curve values and bids differ in length");
  for (std::size_t i = 1; i < values_.size(); ++i)
    if (!(values_[i] > values_[i - 1])) throw InvalidArgument("bid curve values must increase");
}

double BidCurve::operator()(double v) const {
  if (values_.empty()) throw ZeroAllocation("bid curve is empty");
  const std::size_t last = values_.size() - 1;
  if (v <= values_.front()) {
    if (last == 0) return std::min(bids_[0], v);
    const double slope = (bids_[1] - bids_[0]) / (values_[1] - values_[0]);
    return std::min(bids_[0] + slope * (v - values_[0]), v);
  }
  if (v >= values_[last]) {
    if (last == 0) return std::min(bids_[0], v);
    const double slope = (bids_[last] - bids_[last - 1]) / (values_[last] - values_[last - 1]);
    return std::min(bids_[last] + slope * (v - values_[last]), v);
  }
  const auto it = std::upper_bound(values_.begin(), values_.end(), v);
  const std::size_t hi = static_cast<std::size_t>(it - values_.begin());
  const std::size_t lo = hi - 1;
  const double t = (v - values_[lo]) / (values_[hi] - values_[lo]);
  return bids_[lo] + t * (bids_[hi] - bids_[lo]);
}

BidCurve bid_function(const InterimAllocation& a, double capacity) {
  const PaymentCurve pc = capacitated_payment(a, capacity);
  std::vector<double> values;
  std::vector<double> bids;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.x[i] <= 0.0) continue;
    values.push_back(a.grid[i]);
    bids.push_back(pc.p[i] / a.x[i]);
  }
  if (values.empty()) throw ZeroAllocation("allocation is zero on the whole grid");
  return BidCurve(std::move(values), std::move(bids));
}

void write_payment_csv(std::ostream& os, const InterimAllocation& a, double capacity) {
  const PaymentCurve rn = risk_neutral_payment(a);
  const PaymentCurve vc = value_minus_capacity_floor(a, capacity);
  const PaymentCurve pc = capacitated_payment(a, capacity);
  csv::Writer w(os);
  w.header({"value", "x", "p_rn", "p_vc", "p_cap", "bid"});
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double bid = a.x[i] > 0.0 ? pc.p[i] / a.x[i] : std::numeric_limits<double>::quiet_NaN();
    w.row({a.grid[i], a.x[i], rn.p[i], vc.p[i], pc.p[i], bid});
  }
}

}  // namespace capauct
