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
#include <sstream>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "capauct/csv.hpp"
#include "capauct/error.hpp"
#include "capauct/sim.hpp"

namespace capauct {
namespace {

AgentSpec unit_uniform(double capacity) { return {ValueDistribution::uniform(0, 1), capacity}; }

void expect_covers(const RevenueEstimate& e, double truth) {
  EXPECT_NEAR(e.mean, truth, 3.0 * e.half_width_95 + 1e-12);
}

TEST(RevenueEstimate, MatchesOrderStatisticFormulas) {
  const std::size_t s = 200000;
  // E[second of two uniforms] = 1/3; optimal auction with reserve 1/2 = 5/12.
  expect_covers(estimate_revenue(make_spa({unit_uniform(kInf), unit_uniform(kInf)}), s, 3), 1.0 / 3.0);
  expect_covers(estimate_revenue(make_myerson({unit_uniform(kInf), unit_uniform(kInf)}), s, 3), 5.0 / 12.0);
  // E[max(second, first - 1/4)] = 1/3 + (3/4)^3 / 3.
  expect_covers(estimate_revenue(make_csp({unit_uniform(0.25), unit_uniform(0.25)}), s, 3),
                1.0 / 3.0 + 0.421875 / 3.0);
  // E[(v - 1/4)+] = (3/4)^2 / 2.
  expect_covers(estimate_capacity_surplus({unit_uniform(0.25)}, s, 3), 0.28125);
}

TEST(RevenueEstimate, FirstPriceCapacitatedRevenue) {
  // E[p(v)] over two draws with p = v^2/2 below 1/2 and v^2 - v/4 above:
  // 2 int p(v) dv = 7/16.
  const RevenueEstimate fpa = estimate_revenue(make_fpa(unit_uniform(0.25), 2, 2000), 1000000, 5);
  EXPECT_NEAR(fpa.mean, 0.4375, 0.002);
  EXPECT_LT(fpa.half_width_95, 0.002);
}

TEST(RevenueEstimate, LargeCapacitySecondPriceIsPlainSecondPrice) {
  const auto spa = estimate_revenue(make_spa({unit_uniform(kInf), unit_uniform(kInf)}), 50000, 9);
  const auto csp = estimate_revenue(make_csp({unit_uniform(1e9), unit_uniform(1e9)}), 50000, 9);
  EXPECT_EQ(spa.mean, csp.mean);
  EXPECT_EQ(spa.half_width_95, csp.half_width_95);
}

TEST(RevenueEstimate, ReproducibleAndThreadCountFree) {
  const MechanismSpec m = make_csp({unit_uniform(0.3), unit_uniform(0.3), unit_uniform(0.3)});
  const auto a = estimate_revenue(m, 30000, 77, 1);
  const auto b = estimate_revenue(m, 30000, 77, 4);
  const auto c = estimate_revenue(m, 30000, 78, 1);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.half_width_95, b.half_width_95);
  EXPECT_NE(a.mean, c.mean);
  EXPECT_EQ(a.samples, 30000u);
  EXPECT_THROW(estimate_revenue(m, 99, 1), InvalidArgument);
}

TEST(BestResponseGap, EquilibriaAndTruthfulRulesPassTheAudit) {
  const MechanismSpec fpa = make_fpa(unit_uniform(0.25), 2, 2000);
  EXPECT_LE(best_response_gap(fpa, 0, 2000), 0.01);
  EXPECT_LE(best_response_gap(make_spa({unit_uniform(kInf), unit_uniform(kInf)}), 0, 500), 1e-9);
  EXPECT_LE(best_response_gap(make_csp({unit_uniform(0.25), unit_uniform(0.25)}), 1, 500), 1e-9);
}

TEST(BestResponseGap, ShiftedBidsAreCaught) {
  // Negative control: raise every equilibrium bid by 0.05.
  MechanismSpec fpa = make_fpa(unit_uniform(0.25), 2, 1000);
  for (auto& c : fpa.curves) {
    std::vector<double> bids = c.bid.bids();
    for (double& b : bids) b += 0.05;
    c.bid = BidCurve(c.bid.values(), bids);
  }
  EXPECT_GT(best_response_gap(fpa, 0, 1000), 0.01);
}

TEST(BestResponseGap, ShrinksWithGridSize) {
  // Exponential bids are curved, so linear interpolation leaves a small,
  // shrinking incentive to deviate to a cell midpoint.
  double prev = kInf;
  for (std::size_t k : {250, 1000, 2000}) {
    const double gap = best_response_gap(make_fpa({ValueDistribution::exponential(1), kInf}, 2, k), 0, k);
    EXPECT_GT(gap, 0.0) << "k=" << k;
    EXPECT_LT(gap, prev) << "k=" << k;
    prev = gap;
  }
  EXPECT_LE(prev, 0.01);
}

TEST(BulowKlemperer, ClosedFormUniformSingleBidder) {
  // SPA with two uniforms earns 1/3; the optimal auction for one earns 1/4.
  const BulowKlemperer bk = bulow_klemperer(ValueDistribution::uniform(0, 1), 1, 200000, 4);
  expect_covers(bk.spa_more, 1.0 / 3.0);
  expect_covers(bk.myerson, 0.25);
  EXPECT_TRUE(bk.pass);
  EXPECT_TRUE(bulow_klemperer_check(ValueDistribution::exponential(1), 2, 50000, 4));
}

TEST(ApproximationReport, SmallSymmetricInstance) {
  ReportOptions opts;
  opts.lp_k = 8;
  opts.curve_k = 200;
  const ApproximationReport rep = approximation_report({unit_uniform(0.25), unit_uniform(0.25)}, 20000, 6, opts);
  EXPECT_EQ(rep.opt_source, "lp");
  EXPECT_EQ(rep.lp_k, 8u);
  EXPECT_GT(rep.opt_revenue, 0.0);
  ASSERT_NE(rep.find("FPA"), nullptr);
  ASSERT_NE(rep.find("CSP"), nullptr);
  EXPECT_EQ(rep.find("no-such-mechanism"), nullptr);
  for (const BoundCheck& b : rep.checks) {
    if (b.advisory) continue;
    EXPECT_TRUE(b.pass) << b.name;
  }
  EXPECT_TRUE(rep.pass);

  std::stringstream ss;
  write_report_csv(ss, rep);
  const csv::Table t = csv::read(ss);
  EXPECT_EQ(t.names, (std::vector<std::string>{"mechanism", "revenue", "ci", "ratio", "pass"}));
  // One OPT row, then candidates, then checks.
  EXPECT_EQ(t.rows.size(), 1 + rep.candidates.size() + rep.checks.size());
  EXPECT_EQ(t.rows[0][0], "OPT(lp)");
  const auto j = nlohmann::json::parse(report_json(rep));
  EXPECT_EQ(j.at("opt_source"), "lp");
}

TEST(ApproximationReport, LargeInstanceFallsBackToBound) {
  ReportOptions opts;
  opts.force_bound = true;
  opts.curve_k = 200;
  const ApproximationReport rep = approximation_report({unit_uniform(1.0), unit_uniform(1.0)}, 20000, 6, opts);
  EXPECT_EQ(rep.opt_source, "bound");
  EXPECT_GT(rep.opt_half_width, 0.0);
  EXPECT_THROW(approximation_report({}, 1000, 1), EmptyProfile);
}

}  // namespace
}  // namespace capauct
