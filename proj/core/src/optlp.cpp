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

#include "capauct/optlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "capauct/error.hpp"

namespace capauct {
namespace {

const DiscreteTypeSpace& types_of(const AgentSpec& agent) {
  const DiscreteTypeSpace* t = agent.discrete();
  if (t == nullptr) throw InvalidArgument("LP construction needs a discrete type space");
  t->validate();
  return *t;
}

struct ProfileSpace {
  std::vector<std::size_t> radix;
  std::size_t count = 1;

  std::size_t digit(std::size_t profile, std::size_t agent) const {
    for (std::size_t j = 0; j < agent; ++j) profile /= radix[j];
    return profile % radix[agent];
  }
};

ProfileSpace profile_space(const std::vector<AgentSpec>& agents) {
  if (agents.empty()) throw EmptyProfile("at least one agent is required");
  ProfileSpace ps;
  for (const auto& a : agents) {
    const std::size_t k = types_of(a).size();
    ps.radix.push_back(k);
    if (ps.count > kMaxProfiles / k) throw TooLarge("joint type profiles exceed 1e6");
    ps.count *= k;
  }
  return ps;
}

LinearProgram build(const std::vector<AgentSpec>& agents, bool single) {
  const ProfileSpace ps = profile_space(agents);
  const std::size_t n = agents.size();
  const std::size_t cols = 2 * ps.count * n;
  LinearProgram lp(cols);

  std::vector<double> caps(n);
  for (std::size_t i = 0; i < n; ++i) caps[i] = lp_capacity(agents[i]);

  // Profile masses and per-agent digits.
  std::vector<double> mass(ps.count, 1.0);
  std::vector<std::vector<std::size_t>> digits(ps.count, std::vector<std::size_t>(n));
  for (std::size_t p = 0; p < ps.count; ++p) {
    std::size_t rest = p;
    for (std::size_t i = 0; i < n; ++i) {
      digits[p][i] = rest % ps.radix[i];
      rest /= ps.radix[i];
      mass[p] *= types_of(agents[i]).masses[digits[p][i]];
    }
  }

  auto av = [&](std::size_t p, std::size_t i) { return 2 * (p * n + i); };
  auto rho = [&](std::size_t p, std::size_t i) { return 2 * (p * n + i) + 1; };

  lp.names.resize(cols);
  for (std::size_t p = 0; p < ps.count; ++p) {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = types_of(agents[i]).values[digits[p][i]];
      const double c = caps[i];
      lp.objective[av(p, i)] = mass[p] * v;
      lp.objective[rho(p, i)] = mass[p] * (v - c) / c;
      if (single) {
        lp.names[av(p, i)] = "qv[" + std::to_string(p) + "]";
        lp.names[rho(p, i)] = "Cqc[" + std::to_string(p) + "]";
      } else {
        const std::string tag = "[" + std::to_string(i) + "][" + std::to_string(p) + "]";
        lp.names[av(p, i)] = "av" + tag;
        lp.names[rho(p, i)] = "rho" + tag;
      }
    }
  }

  // Interim IC for every agent and ordered pair of types. The mass of the
  // others' profile weights each ex-post column.
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = types_of(agents[i]);
    const double c = caps[i];
    for (std::size_t a = 0; a < t.size(); ++a) {
      for (std::size_t b = 0; b < t.size(); ++b) {
        if (a == b) continue;
        const double gap = t.values[a] - t.values[b];
        const double coef_v = std::min(gap, c);
        const double coef_c = std::min(gap + c, c) / c;
        std::vector<double> row(cols, 0.0);
        for (std::size_t p = 0; p < ps.count; ++p) {
          const std::size_t own = digits[p][i];
          if (own != a && own != b) continue;
          const double w = mass[p] / t.masses[own];
          if (own == a) {
            row[rho(p, i)] += w;
          } else {
            row[av(p, i)] -= w * coef_v;
            row[rho(p, i)] -= w * coef_c;
          }
        }
        lp.add_row(std::move(row), Sense::kGreaterEqual, 0.0);
      }
    }
  }

  // At most one unit of the item per profile.
  for (std::size_t p = 0; p < ps.count; ++p) {
    std::vector<double> row(cols, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      row[av(p, i)] = 1.0;
      row[rho(p, i)] = 1.0 / caps[i];
    }
    lp.add_row(std::move(row), Sense::kLessEqual, 1.0);
  }
  return lp;
}

OptimalRules unpack(const std::vector<AgentSpec>& agents, LpSolution sol) {
  OptimalRules out;
  if (sol.status != LpStatus::kOptimal) {
    out.solution = std::move(sol);
    return out;
  }
  const ProfileSpace ps = profile_space(agents);
  const std::size_t n = agents.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = types_of(agents[i]);
    const double c = lp_capacity(agents[i]);
    TwoPricedRule rule;
    rule.grid = t.values;
    rule.capacity = c;
    rule.qv.assign(t.size(), 0.0);
    rule.qc.assign(t.size(), 0.0);
    for (std::size_t p = 0; p < ps.count; ++p) {
      double others = 1.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) others *= types_of(agents[j]).masses[ps.digit(p, j)];
      const std::size_t own = ps.digit(p, i);
      rule.qv[own] += others * sol.assignment[2 * (p * n + i)];
      rule.qc[own] += others * sol.assignment[2 * (p * n + i) + 1] / c;
    }
    for (std::size_t k = 0; k < t.size(); ++k) {
      rule.qv[k] = std::clamp(rule.qv[k], 0.0, 1.0);
      rule.qc[k] = std::clamp(rule.qc[k], 0.0, 1.0);
      const double total = rule.qv[k] + rule.qc[k];
      if (total > 1.0) {
        rule.qv[k] /= total;
        rule.qc[k] /= total;
      }
    }
    out.rules.push_back(std::move(rule));
  }
  out.revenue = sol.objective_value;
  out.solution = std::move(sol);
  return out;
}

}  // namespace

double lp_capacity(const AgentSpec& agent) {
  if (std::isfinite(agent.capacity)) {
    if (!(agent.capacity > 0.0)) throw InvalidArgument("capacity must be positive");
    return agent.capacity;
  }
  const auto& t = types_of(agent);
  return 1e6 * std::max(1.0, std::abs(t.values.back()));
}

LinearProgram build_single_agent_lp(const AgentSpec& agent) { return build({agent}, true); }

LinearProgram build_multi_agent_expost_lp(const std::vector<AgentSpec>& agents) {
  return build(agents, agents.size() == 1);
}

OptimalRules optimal_two_priced(const AgentSpec& agent) {
  const std::vector<AgentSpec> one{agent};
  return unpack(one, solve_simplex(build(one, true)));
}

TwoPricedRule random_bic_rule(const AgentSpec& agent, Rng& rng) {
  const std::vector<AgentSpec> one{agent};
  LinearProgram lp = build(one, true);
  const double c = lp_capacity(agent);
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    const double w = rng.uniform() * 1.5 - 0.5;
    lp.objective[j] = j % 2 == 0 ? w : w / c;
  }
  OptimalRules r = unpack(one, solve_simplex(lp));
  if (r.solution.status != LpStatus::kOptimal) throw NumericalBreakdown("random objective left the BIC polytope unsolved");
  return std::move(r.rules.front());
}

OptimalRules optimal_two_priced(const std::vector<AgentSpec>& agents) {
  return unpack(agents, solve_simplex(build_multi_agent_expost_lp(agents)));
}

}  // namespace capauct
