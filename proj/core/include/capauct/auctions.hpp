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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "capauct/dist.hpp"
#include "capauct/payid.hpp"
#include "capauct/random.hpp"

namespace capauct {

struct ValueProfile {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

struct Outcome {
  std::optional<std::size_t> winner;
  /// One entry per agent; zero for losers.
  std::vector<double> payments;

  double revenue() const;
};

enum class MechanismKind {
  kFpa,
  kSpa,
  kCsp,
  kMyersonOpt,
  kMaxValueMinusCapacity,  // one-priced, serves the largest v - C
  kMyersonAllocation,      // one-priced, serves as the risk-neutral optimum
};

const char* to_string(MechanismKind kind);
/// Accepts the names produced by to_string; throws InvalidArgument otherwise.
MechanismKind mechanism_kind_from_string(const std::string& name);

/// True for mechanisms that charge a per-agent bid curve to the winner.
bool is_one_priced(MechanismKind kind);

/// Equilibrium or direct-revelation curves of one agent.
struct AgentCurves {
  InterimAllocation allocation;
  PaymentCurve payment;
  BidCurve bid;
};

/// A mechanism together with everything needed to run it on value profiles.
/// Agents must carry continuous distributions. Build with the make_* helpers.
struct MechanismSpec {
  MechanismKind kind = MechanismKind::kSpa;
  std::vector<AgentSpec> agents;
  std::size_t grid_size = 0;
  /// One entry per agent for one-priced kinds; empty otherwise.
  std::vector<AgentCurves> curves;
  /// Monopoly reserves, filled for kinds that use virtual values.
  std::vector<double> reserves;

  const ValueDistribution& dist(std::size_t i) const;
  std::size_t num_agents() const { return agents.size(); }
};

// Outcome rules. Exact ties are broken uniformly at random from `rng`, which
// is only consumed when a tie occurs.

/// Highest value wins and pays the second-highest value (0 alone).
Outcome run_spa(const ValueProfile& profile, Rng& rng);
/// Highest value wins and pays max(second value, own value - own capacity).
Outcome run_csp(const ValueProfile& profile, std::span<const double> capacities, Rng& rng);
/// Serves the largest non-negative virtual value (ties by value, then at
/// random) and charges the smallest winning value. Checks regularity.
Outcome run_myerson(const ValueProfile& profile, const std::vector<ValueDistribution>& dists,
                    Rng& rng);
/// Every agent bids `curve(v)`; the highest bid wins and pays it.
Outcome run_fpa(const ValueProfile& profile, const BidCurve& curve, Rng& rng);

/// Dispatches on the spec's kind.
Outcome run_mechanism(const MechanismSpec& spec, const ValueProfile& profile, Rng& rng);

/// Grid used for equilibrium curves: k value-uniform points on
/// [lower, effective_upper] merged with k quantile midpoints.
std::vector<double> mechanism_grid(const ValueDistribution& d, std::size_t k);

struct FpaEquilibrium {
  InterimAllocation allocation;
  PaymentCurve payment;
  BidCurve bid;
};

/// Symmetric equilibrium of the first-price auction with n agents sharing
/// `agent`: x = F^{n-1}, capacitated payment, bid = p / x.
/// Throws AtomicDistribution for distributions with an atom.
FpaEquilibrium fpa_symmetric_equilibrium(const AgentSpec& agent, std::size_t n, std::size_t k);

MechanismSpec make_spa(std::vector<AgentSpec> agents);
MechanismSpec make_csp(std::vector<AgentSpec> agents);
MechanismSpec make_myerson(std::vector<AgentSpec> agents);
MechanismSpec make_fpa(const AgentSpec& agent, std::size_t n, std::size_t k);

/// One-priced direct mechanisms with allocation either of the risk-neutral
/// optimum (kMyersonAllocation) or of max v_i - C_i (kMaxValueMinusCapacity),
/// each charging the capacitated equilibrium payment. The second needs finite
/// capacities (UnboundedCapacity otherwise); both need regular distributions.
MechanismSpec asym_one_priced(std::vector<AgentSpec> agents, MechanismKind which, std::size_t k);

/// Probability that `agent` wins with `report` while the others report
/// truthfully (or bid their equilibrium curves). Exact ties are shared evenly.
double interim_win_probability(const MechanismSpec& spec, std::size_t agent, double report);

/// sum_k e_k / (k + 1), where e_k is the probability that exactly k of the
/// competitors tie and the rest fall strictly below. Inputs are per-competitor
/// probabilities of falling below and of tying.
double win_probability_with_ties(std::span<const double> below, std::span<const double> tie);

/// {"kind", "grid_size", "agents": [{"distribution", "capacity"}]}.
std::string mechanism_json(const MechanismSpec& spec);

}  // namespace capauct
