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

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "capauct/dist.hpp"
#include "capauct/error.hpp"
#include "capauct/random.hpp"
#include "capauct/two_price.hpp"
#include "oracles.hpp"

namespace capauct {
namespace {

// Exact rational arithmetic for the small worked table.
struct Frac {
  long long n;
  long long d;
};

Frac norm(Frac f) {
  const long long g = std::gcd(f.n < 0 ? -f.n : f.n, f.d);
  return {f.n / g, f.d / g};
}
Frac operator+(Frac a, Frac b) { return norm({a.n * b.d + b.n * a.d, a.d * b.d}); }
Frac operator*(Frac a, Frac b) { return norm({a.n * b.n, a.d * b.d}); }
Frac fmin(Frac a, Frac b) { return a.n * b.d < b.n * a.d ? a : b; }
bool operator==(Frac a, Frac b) { return a.n * b.d == b.n * a.d; }
double to_double(Frac f) { return static_cast<double>(f.n) / static_cast<double>(f.d); }

// U = qv u_C(v - r) + qc u_C(v - r + C), in rationals.
Frac exact_utility(Frac v, Frac r, Frac qv, Frac qc, Frac c) {
  const Frac gap = v + Frac{-r.n, r.d};
  return qv * fmin(gap, c) + qc * fmin(gap + c, c);
}

TwoPricedRule table_rule() {
  TwoPricedRule r;
  r.grid = {3.0, 4.0};
  r.capacity = 2.0;
  r.qv = {1.0 / 3.0, 0.0};
  r.qc = {0.5, 2.0 / 3.0};
  return r;
}

TEST(WorkedTable, UtilitiesMatchExactRationals) {
  const Frac c{2, 1}, v3{3, 1}, v4{4, 1};
  const Frac qv3{1, 3}, qc3{1, 2}, qv4{0, 1}, qc4{2, 3};
  EXPECT_TRUE((exact_utility(v3, v3, qv3, qc3, c) == Frac{1, 1}));
  EXPECT_TRUE((exact_utility(v3, v4, qv4, qc4, c) == Frac{2, 3}));
  EXPECT_TRUE((exact_utility(v4, v4, qv4, qc4, c) == Frac{4, 3}));
  EXPECT_TRUE((exact_utility(v4, v3, qv3, qc3, c) == Frac{4, 3}));

  const TwoPricedRule r = table_rule();
  EXPECT_NEAR(utility_of_report(r, 3, 3), to_double(exact_utility(v3, v3, qv3, qc3, c)), 1e-15);
  EXPECT_NEAR(utility_of_report(r, 3, 4), to_double(exact_utility(v3, v4, qv4, qc4, c)), 1e-15);
  EXPECT_NEAR(utility_of_report(r, 4, 4), to_double(exact_utility(v4, v4, qv4, qc4, c)), 1e-15);
  EXPECT_NEAR(utility_of_report(r, 4, 3), to_double(exact_utility(v4, v3, qv3, qc3, c)), 1e-15);
}

TEST(WorkedTable, BicDespiteDecreasingAllocation) {
  const TwoPricedRule r = table_rule();
  EXPECT_TRUE(check_bic(r).ok());
  EXPECT_GT(r.qv[0] + r.qc[0], r.qv[1] + r.qc[1]);
}

TEST(CheckBic, FlagsProfitableMisreport) {
  // The high type pays its full value; reporting low and paying 1 is better.
  TwoPricedRule r;
  r.grid = {1.0, 2.0};
  r.capacity = 10.0;
  r.qv = {1.0, 1.0};
  r.qc = {0.0, 0.0};
  const BicVerdict verdict = check_bic(r);
  ASSERT_EQ(verdict.violations.size(), 1u);
  EXPECT_EQ(verdict.violations[0].true_index, 1u);
  EXPECT_EQ(verdict.violations[0].report_index, 0u);
  EXPECT_NEAR(verdict.violations[0].slack, -1.0, 1e-12);
}

TEST(CheckBic, UtilityMatchesDirectFormulaOnRandomRules) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    TwoPricedRule r;
    r.capacity = 0.1 + 2.0 * rng.uniform();
    double v = 0.0;
    for (int i = 0; i < 5; ++i) {
      v += 0.05 + rng.uniform();
      const double qv = rng.uniform();
      r.grid.push_back(v);
      r.qv.push_back(qv);
      r.qc.push_back((1.0 - qv) * rng.uniform());
    }
    for (std::size_t i = 0; i < 5; ++i) {
      for (std::size_t j = 0; j < 5; ++j) {
        const double gap = r.grid[i] - r.grid[j];
        const double want = r.qv[j] * std::min(gap, r.capacity) + r.qc[j] * std::min(gap + r.capacity, r.capacity);
        EXPECT_NEAR(utility_of_report_index(r, r.grid[i], j), want, 1e-12);
      }
    }
  }
}

TEST(TwoPricedRule, ValidateRejectsBadProbabilities) {
  TwoPricedRule r = table_rule();
  r.qc[0] = 0.9;
  EXPECT_THROW(r.validate(), Error);
  r = table_rule();
  r.qv.pop_back();
  EXPECT_THROW(r.validate(), Error);
  EXPECT_THROW(utility_of_report(table_rule(), 3.0, 3.5), ReportNotOnGrid);
}

TEST(ExpectedPayment, SellAlwaysOnEqualRevenueIsLogH) {
  // Oracle: E[v] - C with E[v] = 1 + ln h for the equal-revenue law.
  for (double h : {100.0, 1000.0}) {
    const auto space = discretize(ValueDistribution::equal_revenue(h), 100000);
    TwoPricedRule r;
    r.grid = space.values;
    r.capacity = 1.0;
    r.qv.assign(space.size(), 0.0);
    r.qc.assign(space.size(), 1.0);
    EXPECT_NEAR(expected_payment(r, space.masses), std::log(h), 0.02);
  }
}

TEST(ExpectedPayment, LinearLotteryMatchesQuadrature) {
  const double c = 1000.0;
  const double reference = oracle::lottery_revenue_quadrature();
  EXPECT_NEAR(reference, 1.55, 0.02);

  const auto space = discretize(ValueDistribution::equal_revenue(1000), 10000);
  TwoPricedRule r;
  r.grid = space.values;
  r.capacity = c;
  for (double z : space.values) {
    const double qc = 0.6 * (z - 1.0) / 1000.0;
    r.qc.push_back(qc);
    r.qv.push_back(std::min(qc + 0.6, 1.0) - qc);
  }
  EXPECT_TRUE(check_bic(r).ok());
  EXPECT_NEAR(expected_payment(r, space.masses), reference, 0.01);
}

TEST(PostedPrice, MatchesBruteForceOverPrices) {
  const auto space = discretize(ValueDistribution::exponential(1.0), 40);
  double best = 0.0;
  for (std::size_t i = 0; i < space.size(); ++i) {
    double tail = 0.0;
    for (std::size_t j = i; j < space.size(); ++j) tail += space.masses[j];
    best = std::max(best, space.values[i] * tail);
  }
  const TwoPricedRule exact = posted_price_rule(space, kInf);
  EXPECT_NEAR(expected_payment(exact, space.masses), best, 1e-12);
  EXPECT_TRUE(check_bic(exact).ok());
  // A small capacity charges the wealth it cannot use.
  for (double c : {0.1, 1.0}) {
    const TwoPricedRule r = posted_price_rule(space, c);
    EXPECT_GE(expected_payment(r, space.masses), best - 1e-12);
    EXPECT_TRUE(check_bic(r).ok());
  }
}

TEST(OnePricedConversion, PreservesRevenue) {
  const std::vector<double> grid{0.5, 1.0, 2.0, 3.0};
  const std::vector<double> x{0.1, 0.4, 0.7, 1.0};
  const std::vector<double> price{0.2, 0.5, 0.8, 1.5};
  const std::vector<double> masses{0.25, 0.25, 0.25, 0.25};
  double want = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) want += masses[i] * x[i] * price[i];
  for (double c : {0.3, 1.0, 5.0, kInf}) {
    const TwoPricedRule r = two_priced_from_one_priced(grid, x, price, c);
    // Truthful capped utilities are unchanged.
    for (std::size_t i = 0; i < grid.size(); ++i)
      EXPECT_NEAR(utility_of_report_index(r, grid[i], i),
                  x[i] * std::min(grid[i] - price[i], r.capacity), 1e-9);
    // Wealth left stays within C = 1.5 and above, so revenue is exact there.
    if (c >= 1.5) {
      EXPECT_NEAR(expected_payment(r, masses), want, 1e-9) << "C=" << c;
    } else {
      EXPECT_GT(expected_payment(r, masses), want) << "C=" << c;
    }
  }
  const std::vector<double> too_high{0.2, 1.5, 0.8, 1.5};
  EXPECT_THROW(two_priced_from_one_priced(grid, x, too_high, 1.0), InvalidArgument);
}

TEST(StepIntegral, RightContinuousSteps) {
  const std::vector<double> grid{1.0, 2.0, 4.0};
  const std::vector<double> f{1.0, 3.0, 5.0};
  EXPECT_DOUBLE_EQ(step_integral(grid, f, 0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(step_integral(grid, f, 0.0, 3.0), 1.0 + 3.0);
  EXPECT_DOUBLE_EQ(step_integral(grid, f, 1.5, 5.0), 0.5 + 6.0 + 5.0);
}

TEST(QbarTransform, RunningSupremumAndCumulativeIntegral) {
  TwoPricedRule r;
  r.grid = {1.0, 2.0, 3.0, 5.0};
  r.capacity = 4.0;
  r.qv = {0.4, 0.2, 0.6, 0.1};
  r.qc = {0.0, 0.2, 0.3, 0.9};
  const TransformedRule t = qbar_transform(r);
  const std::vector<double> chi{0.1, 0.1, 0.15, 0.15};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(t.chi[i], chi[i], 1e-15);
  EXPECT_NEAR(t.qc[0], 0.0, 1e-15);
  EXPECT_NEAR(t.qc[1], 0.1, 1e-15);
  EXPECT_NEAR(t.qc[2], 0.2, 1e-15);
  // Above C the original qc is kept.
  EXPECT_NEAR(t.qc[3], 0.9, 1e-15);
  EXPECT_EQ(t.qv, r.qv);
}

TEST(Decomposition, PartsSumToTransformedPaymentBelowCapacity) {
  TwoPricedRule r;
  r.grid = {1.0, 2.0, 3.0};
  r.capacity = 10.0;
  r.qv = {0.2, 0.3, 0.5};
  r.qc = {0.0, 0.02, 0.05};
  ASSERT_TRUE(check_bic(r).ok());
  const TransformedRule t = qbar_transform(r);
  const PaymentParts parts = decomposition(t, 3.0);
  EXPECT_DOUBLE_EQ(parts.p3, 0.0);
  // p1 is v q(v) minus the area under q.
  const double q0 = t.qv[0] + t.qc[0], q1 = t.qv[1] + t.qc[1], q2 = t.qv[2] + t.qc[2];
  EXPECT_NEAR(parts.p1, 3.0 * q2 - (q0 + q1), 1e-12);
  EXPECT_NEAR(parts.p2, t.qc[0] + t.qc[1], 1e-12);
}

TEST(PaymentBound, TwoPointClosedForm) {
  // Types 1 and 2 equally likely; discrete phi = (0, 2).
  const DiscreteTypeSpace space{{1.0, 2.0}, {0.5, 0.5}};
  const TwoPricedRule posted = posted_price_rule(space, kInf);
  const PaymentBound b = payment_upper_bound(posted, space);
  EXPECT_NEAR(b.parts[0], 1.0, 1e-12);
  EXPECT_GE(b.total + 1e-12, expected_payment(posted, space.masses));
}

TEST(RuleCsv, RoundTripsThroughText) {
  const TwoPricedRule r = table_rule();
  std::stringstream ss;
  write_rule_csv(ss, r);
  EXPECT_EQ(ss.str().substr(0, 12), "value,qv,qc\n");
  const TwoPricedRule back = read_rule_csv(ss, capacity_from_metadata_json(rule_metadata_json(r)));
  EXPECT_EQ(back.grid, r.grid);
  EXPECT_EQ(back.qv, r.qv);
  EXPECT_EQ(back.qc, r.qc);
  EXPECT_EQ(back.capacity, r.capacity);

  TwoPricedRule inf = r;
  inf.capacity = kInf;
  EXPECT_TRUE(std::isinf(capacity_from_metadata_json(rule_metadata_json(inf))));
}

}  // namespace
}  // namespace capauct
