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
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "capauct/auctions.hpp"
#include "capauct/dist.hpp"

namespace capauct {

struct RevenueEstimate {
  double mean = 0.0;
  /// 1.96 sample standard deviations over sqrt(samples).
  double half_width_95 = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Profiles processed per batch. Each batch draws values and tie-breaks from
/// its own streams, so results depend only on (seed, samples).
inline constexpr std::size_t kBatchSize = 8192;

/// Monte-Carlo revenue of `mech`. Batches may run on several threads; they
/// are merged in batch order. Throws InvalidArgument for fewer than 100
/// samples.
RevenueEstimate estimate_revenue(const MechanismSpec& mech, std::size_t samples, std::uint64_t seed,
                                 unsigned threads = 0);

/// Same batching for E[max_i (v_i - C_i)+].
RevenueEstimate estimate_capacity_surplus(const std::vector<AgentSpec>& agents, std::size_t samples,
                                          std::uint64_t seed, unsigned threads = 0);

/// Largest gain in capped interim utility any type of `agent` obtains by
/// misreporting, scanned over `grid` audit values placed at the quantile
/// midpoints of the agent's distribution. One-priced kinds use the exact
/// win probability and the stored bid curve; threshold kinds integrate the
/// winning threshold's distribution cell by cell.
double best_response_gap(const MechanismSpec& mech, std::size_t agent, std::size_t grid);

struct CandidateResult {
  std::string name;
  RevenueEstimate estimate;
  /// opt / mean; infinite when the mean is not positive.
  double ratio = 0.0;
};

/// One approximation claim: opt <= factor * revenue + slack.
struct BoundCheck {
  std::string name;
  /// Mechanisms whose best estimate is compared.
  std::vector<std::string> over;
  double factor = 0.0;
  double best_revenue = 0.0;
  double slack = 0.0;
  /// Ordering checks compare best_revenue against this estimate instead.
  double reference = 0.0;
  bool pass = false;
  /// Reported but left out of ApproximationReport::pass.
  bool advisory = false;
};

/// True for the FPA revenue-ordering checks, which compare against
/// BoundCheck::reference rather than OPT.
bool is_ordering(const BoundCheck& b);

struct ApproximationReport {
  double opt_revenue = 0.0;
  /// Zero when OPT comes from the LP.
  double opt_half_width = 0.0;
  /// "lp" or "bound".
  std::string opt_source;
  std::size_t lp_k = 0;
  std::vector<CandidateResult> candidates;
  std::vector<BoundCheck> checks;
  bool pass = false;

  const CandidateResult* find(const std::string& name) const;
};

struct ReportOptions {
  /// Types per agent in the LP; 0 picks by agent count (60, 20, 8).
  std::size_t lp_k = 0;
  /// Grid size for equilibrium and one-priced curves.
  std::size_t curve_k = 1000;
  /// Skip the LP and use the analytic bound.
  bool force_bound = false;
  unsigned threads = 0;
};

/// OPT from the ex-post LP on the discretized instance, or, when the LP is too
/// large, 2 REV(Myerson) + E[max_i (v_i - C_i)+], which bounds every BIC
/// mechanism. Estimates every applicable candidate and checks the 3- and 5-
/// approximations (the latter on symmetric instances) with a slack of three
/// half-widths, plus the one-third guarantee of the best one-priced rule.
ApproximationReport approximation_report(const std::vector<AgentSpec>& agents, std::size_t samples,
                                         std::uint64_t seed, const ReportOptions& options = {});

/// Header `mechanism,revenue,ci,ratio,pass`. Checks appear as extra rows.
void write_report_csv(std::ostream& os, const ApproximationReport& report);
std::string report_json(const ApproximationReport& report);

struct BulowKlemperer {
  RevenueEstimate spa_more;  // n + 1 bidders
  RevenueEstimate myerson;   // n bidders
  bool pass = false;
};

/// SPA with n + 1 bidders against the optimal auction with n, slack three
/// half-widths. Throws NotRegular.
BulowKlemperer bulow_klemperer(const ValueDistribution& d, std::size_t n, std::size_t samples,
                               std::uint64_t seed);
bool bulow_klemperer_check(const ValueDistribution& d, std::size_t n, std::size_t samples,
                           std::uint64_t seed);

}  // namespace capauct
