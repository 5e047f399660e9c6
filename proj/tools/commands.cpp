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

#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "capauct/auctions.hpp"
#include "capauct/csv.hpp"
#include "capauct/error.hpp"
#include "capauct/optlp.hpp"
#include "capauct/payid.hpp"
#include "capauct/sim.hpp"
#include "capauct/two_price.hpp"
#include "cli.hpp"
#include "output.hpp"
#include "rules.hpp"

namespace capauct::cli {
namespace {

std::size_t first_or(const std::vector<std::size_t>& v, std::size_t fallback) {
  return v.empty() ? fallback : v.front();
}

void require_agents(const ExperimentConfig& config) {
  if (config.agents.empty()) throw InvalidArgument("no agents: pass --dist or a config file with agents");
}

// Replicates a lone agent to n bidders for the symmetric commands.
std::vector<AgentSpec> symmetric_agents(const ExperimentConfig& config, std::size_t default_n) {
  require_agents(config);
  std::vector<AgentSpec> agents = config.agent_specs();
  if (agents.size() == 1) agents.assign(default_n, agents.front());
  for (const auto& a : agents)
    if (a.continuous()->describe() != agents.front().continuous()->describe() ||
        !(a.capacity == agents.front().capacity))
      throw InvalidArgument("this command needs identical agents");
  return agents;
}

MechanismSpec build_mechanism(MechanismKind kind, const std::vector<AgentSpec>& agents, std::size_t k) {
  switch (kind) {
    case MechanismKind::kFpa: {
      const std::vector<AgentSpec> same = agents;
      for (const auto& a : same)
        if (a.continuous()->describe() != same.front().continuous()->describe() ||
            !(a.capacity == same.front().capacity))
          throw InvalidArgument("FPA needs identical agents");
      return make_fpa(agents.front(), agents.size(), k);
    }
    case MechanismKind::kSpa: return make_spa(agents);
    case MechanismKind::kCsp: return make_csp(agents);
    case MechanismKind::kMyersonOpt: return make_myerson(agents);
    case MechanismKind::kMaxValueMinusCapacity:
    case MechanismKind::kMyersonAllocation: return asym_one_priced(agents, kind, k);
  }
  throw InvalidArgument("unknown mechanism");
}

// Every mechanism that can be built for these agents, in a fixed order.
std::vector<MechanismKind> applicable(const std::vector<AgentSpec>& agents) {
  bool same = true;
  bool atomless = true;
  bool finite = true;
  for (const auto& a : agents) {
    same = same && a.continuous()->describe() == agents.front().continuous()->describe() &&
           a.capacity == agents.front().capacity;
    atomless = atomless && a.continuous()->atom_at_upper() == 0.0;
    finite = finite && std::isfinite(a.capacity);
  }
  std::vector<MechanismKind> out;
  if (same && atomless && agents.size() >= 2) out.push_back(MechanismKind::kFpa);
  out.push_back(MechanismKind::kSpa);
  out.push_back(MechanismKind::kCsp);
  out.push_back(MechanismKind::kMyersonOpt);
  out.push_back(MechanismKind::kMyersonAllocation);
  if (finite) out.push_back(MechanismKind::kMaxValueMinusCapacity);
  return out;
}

}  // namespace

ExperimentConfig resolve(const Flags& flags) {
  ExperimentConfig c;
  if (!flags.config_path.empty()) {
    std::ifstream in(flags.config_path);
    if (!in) throw InvalidArgument("cannot read config file " + flags.config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    c = config_from_json(ss.str());
  }
  if (flags.seed) c.seed = *flags.seed;
  if (flags.out) c.output_dir = *flags.out;
  if (!flags.k.empty()) c.grid_sizes = flags.k;
  if (!flags.samples.empty()) c.sample_counts = flags.samples;
  if (!flags.mechanisms.empty()) c.mechanisms = flags.mechanisms;

  if (!flags.dists.empty()) {
    c.agents.clear();
    for (const auto& d : flags.dists) c.agents.push_back(AgentConfig{parse_distribution(d).describe(), kInf});
  }
  if (!flags.capacities.empty()) {
    if (flags.capacities.size() != 1 && flags.capacities.size() != c.agents.size())
      throw InvalidArgument("give one --capacity, or one per agent");
    for (std::size_t i = 0; i < c.agents.size(); ++i)
      c.agents[i].capacity = parse_capacity(flags.capacities.size() == 1 ? flags.capacities[0] : flags.capacities[i]);
  }
  if (flags.n > 0) {
    if (c.agents.size() != 1) throw InvalidArgument("--n replicates exactly one distribution");
    c.agents.assign(flags.n, c.agents.front());
  }
  c.validate();
  return c;
}

int solve_lp(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  require_agents(config);
  const std::size_t k = first_or(config.grid_sizes, 50);
  std::vector<AgentSpec> agents;
  for (const auto& a : config.agent_specs()) agents.push_back(AgentSpec{discretize(*a.continuous(), k), a.capacity});

  Output files(config.output_dir);
  const LinearProgram lp = build_multi_agent_expost_lp(agents);
  LpSolution sol;
  std::string failure;
  try {
    sol = solve_simplex(lp);
    if (sol.status != LpStatus::kOptimal) failure = std::string("LP status ") + to_string(sol.status);
  } catch (const NumericalBreakdown& e) {
    failure = e.what();
  }
  if (!failure.empty()) {
    auto dump = files.open("lp_dump.txt");
    write_lp_text(dump, lp);
    err << "solve-lp failed: " << failure << "; LP written to " << files.path("lp_dump.txt") << '\n';
    return kExitSolver;
  }
  const OptimalRules opt = optimal_two_priced(agents);

  nlohmann::ordered_json summary;
  summary["k"] = k;
  summary["status"] = to_string(sol.status);
  summary["revenue"] = opt.revenue;
  summary["iterations"] = opt.solution.iterations;
  summary["rows"] = lp.num_rows();
  summary["columns"] = lp.num_vars();
  summary["agents"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < opt.rules.size(); ++i) {
    const std::string stem = "lp_rule_agent" + std::to_string(i);
    auto csv_out = files.open(stem + ".csv");
    write_rule_csv(csv_out, opt.rules[i]);
    files.write(stem + ".json", rule_metadata_json(opt.rules[i]) + "\n");
    nlohmann::ordered_json aj;
    aj["distribution"] = config.agents[i].distribution;
    aj["capacity"] = format_capacity(config.agents[i].capacity);
    aj["expected_payment"] = expected_payment(opt.rules[i], agents[i].discrete()->masses);
    aj["bic"] = check_bic(opt.rules[i]).ok();
    aj["rule_csv"] = stem + ".csv";
    summary["agents"].push_back(aj);
  }
  files.write("lp_summary.json", summary.dump(2) + "\n");
  out << "solve-lp: status=optimal k=" << k << " revenue=" << csv::format_number(opt.revenue) << '\n';
  return kExitOk;
}

int fpa_eq(const ExperimentConfig& config, std::ostream& out, std::ostream&) {
  const std::vector<AgentSpec> agents = symmetric_agents(config, 2);
  const std::size_t k = first_or(config.grid_sizes, 2000);
  const MechanismSpec mech = make_fpa(agents.front(), agents.size(), k);
  Output files(config.output_dir);
  {
    auto curve = files.open("fpa_curve.csv");
    write_payment_csv(curve, mech.curves.front().allocation, agents.front().capacity);
  }
  const double gap = best_response_gap(mech, 0, k);
  {
    auto audit = files.open("fpa_audit.csv");
    csv::Writer w(audit);
    w.header({"agent", "audit_grid", "max_gap", "threshold", "pass"});
    audit << 0 << ',' << k << ',' << csv::format_number(gap) << ",0.01," << (gap <= kAuditThreshold ? "true" : "false")
          << '\n';
  }
  files.write("mechanism.json", mechanism_json(mech) + "\n");
  out << "fpa-eq: n=" << agents.size() << " k=" << k << " max_gap=" << csv::format_number(gap) << '\n';
  return gap <= kAuditThreshold ? kExitOk : kExitCheckFailed;
}

int simulate(const ExperimentConfig& config, unsigned threads, std::ostream& out, std::ostream&) {
  require_agents(config);
  const std::vector<AgentSpec> agents = config.agent_specs();
  const std::size_t k = first_or(config.grid_sizes, 1000);
  const std::size_t samples = first_or(config.sample_counts, 100000);
  std::vector<MechanismKind> kinds;
  if (config.mechanisms.empty()) {
    kinds = applicable(agents);
  } else {
    for (const auto& m : config.mechanisms) kinds.push_back(mechanism_kind_from_string(m));
  }
  Output files(config.output_dir);
  auto table = files.open("simulate.csv");
  table << "mechanism,revenue,ci,samples,seed\n";
  nlohmann::ordered_json specs = nlohmann::ordered_json::array();
  for (MechanismKind kind : kinds) {
    const MechanismSpec mech = build_mechanism(kind, agents, k);
    const std::uint64_t seed = derive_seed(config.seed, streams::kMechanismBase * (static_cast<std::uint64_t>(kind) + 1));
    const RevenueEstimate est = estimate_revenue(mech, samples, seed, threads);
    table << to_string(kind) << ',' << csv::format_number(est.mean) << ',' << csv::format_number(est.half_width_95)
          << ',' << est.samples << ',' << est.seed << '\n';
    specs.push_back(nlohmann::ordered_json::parse(mechanism_json(mech)));
    out << "simulate: " << to_string(kind) << " revenue=" << csv::format_number(est.mean)
        << " ci=" << csv::format_number(est.half_width_95) << '\n';
  }
  files.write("mechanisms.json", specs.dump(2) + "\n");
  return kExitOk;
}

int payment_curve(const ExperimentConfig& config, std::ostream& out, std::ostream&) {
  require_agents(config);
  std::vector<AgentSpec> agents = config.agent_specs();
  if (agents.size() == 1) agents.assign(2, agents.front());
  const std::size_t k = first_or(config.grid_sizes, 1000);
  MechanismKind kind = applicable(agents).front() == MechanismKind::kFpa ? MechanismKind::kFpa
                                                                          : MechanismKind::kMyersonAllocation;
  if (!config.mechanisms.empty()) kind = mechanism_kind_from_string(config.mechanisms.front());
  if (!is_one_priced(kind)) throw InvalidArgument("payment curves exist only for one-priced mechanisms");
  const MechanismSpec mech = build_mechanism(kind, agents, k);
  Output files(config.output_dir);
  for (std::size_t i = 0; i < mech.num_agents(); ++i) {
    const std::string name = "payment_curve_agent" + std::to_string(i) + ".csv";
    auto os = files.open(name);
    write_payment_csv(os, mech.curves[i].allocation, agents[i].capacity);
    out << "payment-curve: " << to_string(kind) << " agent " << i << " -> " << files.path(name).string() << '\n';
  }
  return kExitOk;
}

int bound(const ExperimentConfig& config, std::ostream& out, std::ostream&) {
  require_agents(config);
  const std::size_t k = first_or(config.grid_sizes, 100);
  Output files(config.output_dir);
  auto table = files.open("bound.csv");
  table << "agent,rule,revenue,bound,p1,p2,p3,bic\n";
  const std::vector<AgentSpec> specs = config.agent_specs();
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const ValueDistribution& d = *specs[i].continuous();
    const DiscreteTypeSpace space = discretize(d, k);
    const AgentSpec agent{space, specs[i].capacity};
    std::vector<std::pair<std::string, TwoPricedRule>> rules;
    rules.emplace_back("lp", optimal_two_priced(agent).rules.front());
    rules.emplace_back("posted-price", posted_price_rule(space, lp_capacity(agent)));
    if (std::isfinite(specs[i].capacity)) rules.emplace_back("sell-always", sell_always(space, specs[i].capacity));
    for (const auto& [name, rule] : rules) {
      const double revenue = expected_payment(rule, space.masses);
      const PaymentBound b = payment_upper_bound(rule, space);
      table << i << ',' << name << ',' << csv::format_number(revenue) << ',' << csv::format_number(b.total) << ','
            << csv::format_number(b.parts[0]) << ',' << csv::format_number(b.parts[1]) << ','
            << csv::format_number(b.parts[2]) << ',' << (check_bic(rule).ok() ? "true" : "false") << '\n';
      out << "bound: agent " << i << ' ' << name << " revenue=" << csv::format_number(revenue)
          << " bound=" << csv::format_number(b.total) << '\n';
    }
  }
  return kExitOk;
}

}  // namespace capauct::cli
