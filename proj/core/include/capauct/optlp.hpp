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
#include <vector>

#include "capauct/dist.hpp"
#include "capauct/random.hpp"
#include "capauct/simplex.hpp"
#include "capauct/two_price.hpp"

namespace capauct {

/// Largest joint type-profile count accepted by the multi-agent LP.
inline constexpr std::size_t kMaxProfiles = 1'000'000;

/// Capacity the LP actually uses for an agent. An infinite capacity is
/// replaced by a finite stand-in far above every value, which leaves the
/// feasible payments unchanged in the scaled columns.
double lp_capacity(const AgentSpec& agent);

/// Columns 2i and 2i+1 hold qv_i and w_i = C qc_i for grid type i. Scaling the
/// qc column by C keeps the program well conditioned for large capacities.
LinearProgram build_single_agent_lp(const AgentSpec& agent);

/// Ex-post program over every joint type profile. For agent i and profile p
/// (mixed radix, agent 0 fastest) column 2(p n + i) is a^v_i(p) and the next
/// one is rho_i(p) = C_i a^c_i(p). IC rows constrain the interim marginals.
/// Throws TooLarge above kMaxProfiles profiles.
LinearProgram build_multi_agent_expost_lp(const std::vector<AgentSpec>& agents);

struct OptimalRules {
  /// One interim rule per agent, with capacity lp_capacity(agent).
  std::vector<TwoPricedRule> rules;
  double revenue = 0.0;
  LpSolution solution;
};

OptimalRules optimal_two_priced(const AgentSpec& agent);
OptimalRules optimal_two_priced(const std::vector<AgentSpec>& agents);

/// Vertex of the single-agent BIC polytope picked by a random objective.
/// Mixtures of such vertices sample the feasible set for property checks.
TwoPricedRule random_bic_rule(const AgentSpec& agent, Rng& rng);

}  // namespace capauct
