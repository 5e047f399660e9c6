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

#include "capauct/auctions.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <nlohmann/json.hpp>

#include "capauct/error.hpp"

namespace capauct {
namespace {

constexpr double kPhiTol = 1e-9;

double phi_tol(double phi) { return kPhiTol * std::max(1.0, std::abs(phi)); }

void require_agents(std::size_t n) {
  if (n == 0) throw EmptyProfile("no agents");
}

const ValueDistribution& continuous_of(const AgentSpec& a) {
  const ValueDistribution* d = a.continuous();
  if (d == nullptr) throw InvalidArgument("mechanisms need continuous value distributions");
  return *d;
}

double clamp_to_support(const ValueDistribution& d, double v) {
  return std::clamp(v, d.lower_support(), d.upper_support());
}

double phi_at(const ValueDistribution& d, double v) {
  return virtual_value(d, clamp_to_support(d, v));
}

// Uniformly random index among those tied with `best` under `same`.
template <typename Same>
std::size_t break_tie(std::size_t n, std::size_t best, Same same, Rng& rng) {
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < n; ++i)
    if (same(i, best)) tied.push_back(i);
  if (tied.size() <= 1) return best;
  return tied[rng.index(tied.size())];
}

Outcome highest_wins(std::span<const double> bids, Rng& rng, std::size_t& winner) {
  require_agents(bids.size());
  std::size_t best = 0;
  for (std::size_t i = 1; i < bids.size(); ++i)
    if (bids[i] > bids[best]) best = i;
  winner = break_tie(bids.size(), best, [&](std::size_t a, std::size_t b) { return bids[a] == bids[b]; }, rng);
  Outcome out;
  out.winner = winner;
  out.payments.assign(bids.size(), 0.0);
  return out;
}

double second_highest(std::span<const double> values, std::size_t winner) {
  double s = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i == winner) continue;
    s = any ? std::max(s, values[i]) : values[i];
    any = true;
  }
  return any ? s : 0.0;
}

// Lexicographic order on (virtual value, value) with a tolerance on the
// virtual value.
int compare_rank(double phi_a, double v_a, double phi_b, double v_b) {
  const double tol = phi_tol(std::max(std::abs(phi_a), std::abs(phi_b)));
  if (phi_a > phi_b + tol) return 1;
  if (phi_b > phi_a + tol) return -1;
  if (v_a > v_b) return 1;
  if (v_b > v_a) return -1;
  return 0;
}

// Winner of the virtual-surplus maximizer, or nullopt when every virtual
// value is negative.
std::optional<std::size_t> myerson_winner(const ValueProfile& profile,
                                          const std::vector<const ValueDistribution*>& dists,
                                          std::vector<double>& phis, Rng& rng) {
  const std::size_t n = profile.size();
  phis.resize(n);
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < n; ++i) {
    phis[i] = phi_at(*dists[i], profile.values[i]);
    if (phis[i] < -phi_tol(phis[i])) continue;
    if (!best || compare_rank(phis[i], profile.values[i], phis[*best], profile.values[*best]) > 0) best = i;
  }
  if (!best) return best;
  const std::size_t b = *best;
  return break_tie(
      n, b,
      [&](std::size_t a, std::size_t c) {
        return phis[a] >= -phi_tol(phis[a]) &&
               compare_rank(phis[a], profile.values[a], phis[c], profile.values[c]) == 0;
      },
      rng);
}

// Smallest value with which agent i, facing the best competitor (phi_star,
// v_star), still wins; at least the reserve.
double myerson_threshold(const ValueDistribution& d, double reserve, bool has_rival,
                         double phi_star, double v_star) {
  if (!has_rival || phi_star < -phi_tol(phi_star)) return reserve;
  const double lo_point = inverse_virtual_value(d, phi_star);
  double z = lo_point;
  if (lo_point < v_star) {
    const double probe = std::min(v_star, d.upper_support());
    if (phi_at(d, probe) <= phi_star + phi_tol(phi_star)) {
      // Virtual value is flat up to the rival's value; the value decides.
      z = probe;
    } else {
      z = std::max(lo_point, inverse_virtual_value(d, phi_star + 2.0 * phi_tol(phi_star)));
      z = std::min(z, v_star);
    }
  }
  return std::max(z, reserve);
}

Outcome myerson_outcome(const ValueProfile& profile, const std::vector<const ValueDistribution*>& dists,
                        const std::vector<double>& reserves, Rng& rng) {
  require_agents(profile.size());
  if (dists.size() != profile.size()) throw LengthMismatch("one distribution per agent");
  Outcome out;
  out.payments.assign(profile.size(), 0.0);
  std::vector<double> phis;
  out.winner = myerson_winner(profile, dists, phis, rng);
  if (!out.winner) return out;
  const std::size_t w = *out.winner;
  bool has_rival = false;
  std::size_t rival = 0;
  for (std::size_t j = 0; j < profile.size(); ++j) {
    if (j == w || phis[j] < -phi_tol(phis[j])) continue;
    if (!has_rival || compare_rank(phis[j], profile.values[j], phis[rival], profile.values[rival]) > 0) {
      rival = j;
      has_rival = true;
    }
  }
  const double z = myerson_threshold(*dists[w], reserves[w], has_rival, has_rival ? phis[rival] : 0.0,
                                     has_rival ? profile.values[rival] : 0.0);
  out.payments[w] = std::min(z, profile.values[w]);
  return out;
}

std::vector<const ValueDistribution*> dist_pointers(const MechanismSpec& spec) {
  std::vector<const ValueDistribution*> out;
  for (std::size_t i = 0; i < spec.num_agents(); ++i) out.push_back(&spec.dist(i));
  return out;
}

// P[(phi_j(V), V) < (phi, v)] and the probability of an exact tie, for V ~ d.
std::pair<double, double> lexicographic_rank(const ValueDistribution& d, double phi, double v) {
  const double hi = d.upper_support();
  if (std::isfinite(hi) && phi_at(d, hi) < phi - phi_tol(phi)) return {1.0, 0.0};
  const double lo_point = inverse_virtual_value(d, phi);
  double z = lo_point;
  if (lo_point < v) {
    const double probe = std::min(v, hi);
    if (phi_at(d, probe) <= phi + phi_tol(phi)) {
      z = probe;
    } else {
      z = std::max(lo_point, std::min(v, inverse_virtual_value(d, phi + 2.0 * phi_tol(phi))));
    }
  }
  const double below = d.cdf_left(z);
  const double tie = (z == v) ? d.cdf(z) - below : 0.0;
  return {below, tie};
}

InterimAllocation allocation_on_grid(const MechanismSpec& spec, std::size_t agent,
                                     std::vector<double> grid) {
  InterimAllocation a;
  a.grid = std::move(grid);
  a.x.reserve(a.grid.size());
  for (double v : a.grid) a.x.push_back(std::clamp(interim_win_probability(spec, agent, v), 0.0, 1.0));
  // Round-off in products of cdfs must not read as non-monotone.
  for (std::size_t i = 1; i < a.x.size(); ++i) a.x[i] = std::max(a.x[i], a.x[i - 1]);
  return a;
}

AgentCurves curves_for(const InterimAllocation& a, double capacity) {
  AgentCurves c;
  c.allocation = a;
  c.payment = capacitated_payment(a, capacity);
  c.bid = bid_function(a, capacity);
  return c;
}

// Points inside grid cells where the capacitated payment changes branch
// between the value-minus-capacity floor and the shifted risk-neutral curve.
// The bid curve has a kink there; putting it on a knot keeps linear
// interpolation from overcharging across the cell.
std::vector<double> branch_switches(const InterimAllocation& a, double capacity,
                                    const std::function<double(double)>& x_at) {
  std::vector<double> out;
  if (!std::isfinite(capacity)) return out;
  const PaymentCurve rn = risk_neutral_payment(a);
  double offset = 0.0;
  bool on_floor = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double vc = a.x[i] == 0.0 ? 0.0 : (a.grid[i] - capacity) * a.x[i];
    const bool floor_now = vc > rn.p[i] + offset;
    if (i > 0 && floor_now != on_floor && a.x[i - 1] > 0.0) {
      const double lo = a.grid[i - 1];
      const double area_lo = lo * a.x[i - 1] - rn.p[i - 1];
      // Floor minus risk-neutral payment at v inside the cell.
      auto lift = [&](double v) {
        const double x = std::max(x_at(v), a.x[i - 1]);
        const double area = area_lo + 0.5 * (a.x[i - 1] + x) * (v - lo);
        return (v - capacity) * x - (v * x - area);
      };
      double l = lo;
      double h = a.grid[i];
      if (floor_now) {
        // Rising through the running maximum.
        for (int it = 0; it < 80; ++it) {
          const double m = 0.5 * (l + h);
          (lift(m) > offset ? h : l) = m;
        }
      } else {
        // The lift peaks inside the cell, then falls away.
        for (int it = 0; it < 80; ++it) {
          const double m1 = l + (h - l) / 3.0;
          const double m2 = h - (h - l) / 3.0;
          (lift(m1) < lift(m2) ? l : h) = lift(m1) < lift(m2) ? m1 : m2;
        }
      }
      const double root = 0.5 * (l + h);
      const double tol = 1e-12 * std::max(1.0, std::abs(root));
      if (root - a.grid[i - 1] > tol && a.grid[i] - root > tol) out.push_back(root);
    }
    on_floor = floor_now;
    offset = std::max(offset, std::max(vc, rn.p[i] + offset) - rn.p[i]);
  }
  return out;
}

std::vector<double> with_points(std::vector<double> grid, const std::vector<double>& extra) {
  grid.insert(grid.end(), extra.begin(), extra.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

void insert_split(std::vector<double>& grid, double at) {
  if (!(at > grid.front() && at < grid.back())) return;
  const double before = at - 1e-9 * std::max(1.0, std::abs(at));
  grid.push_back(at);
  if (before > grid.front()) grid.push_back(before);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
}

void require_regular(const ValueDistribution& d) {
  if (!is_regular(d)) throw NotRegular(d.describe() + " is not regular");
}

}  // namespace

double Outcome::revenue() const {
  double s = 0.0;
  for (double p : payments) s += p;
  return s;
}

const char* to_string(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::kFpa: return "FPA";
    case MechanismKind::kSpa: return "SPA";
    case MechanismKind::kCsp: return "CSP";
    case MechanismKind::kMyersonOpt: return "MyersonOpt";
    case MechanismKind::kMaxValueMinusCapacity: return "MaxVMinusC-OnePriced";
    case MechanismKind::kMyersonAllocation: return "MyersonAlloc-OnePriced";
  }
  return "unknown";
}

MechanismKind mechanism_kind_from_string(const std::string& name) {
  for (auto k : {MechanismKind::kFpa, MechanismKind::kSpa, MechanismKind::kCsp, MechanismKind::kMyersonOpt,
                 MechanismKind::kMaxValueMinusCapacity, MechanismKind::kMyersonAllocation})
    if (name == to_string(k)) return k;
  throw InvalidArgument("unknown mechanism '" + name + "'");
}

bool is_one_priced(MechanismKind kind) {
  return kind == MechanismKind::kFpa || kind == MechanismKind::kMaxValueMinusCapacity ||
         kind == MechanismKind::kMyersonAllocation;
}

const ValueDistribution& MechanismSpec::dist(std::size_t i) const { return continuous_of(agents.at(i)); }

Outcome run_spa(const ValueProfile& profile, Rng& rng) {
  std::size_t w = 0;
  Outcome out = highest_wins(profile.values, rng, w);
  out.payments[w] = second_highest(profile.values, w);
  return out;
}

Outcome run_csp(const ValueProfile& profile, std::span<const double> capacities, Rng& rng) {
  if (capacities.size() != profile.size()) throw LengthMismatch("one capacity per agent");
  std::size_t w = 0;
  Outcome out = highest_wins(profile.values, rng, w);
  out.payments[w] = std::max(second_highest(profile.values, w), profile.values[w] - capacities[w]);
  return out;
}

Outcome run_myerson(const ValueProfile& profile, const std::vector<ValueDistribution>& dists, Rng& rng) {
  std::vector<const ValueDistribution*> ptrs;
  std::vector<double> reserves;
  for (const auto& d : dists) {
    ptrs.push_back(&d);
    reserves.push_back(monopoly_reserve(d));
  }
  return myerson_outcome(profile, ptrs, reserves, rng);
}

Outcome run_fpa(const ValueProfile& profile, const BidCurve& curve, Rng& rng) {
  std::vector<double> bids;
  bids.reserve(profile.size());
  for (double v : profile.values) bids.push_back(curve(v));
  std::size_t w = 0;
  Outcome out = highest_wins(bids, rng, w);
  out.payments[w] = bids[w];
  return out;
}

Outcome run_mechanism(const MechanismSpec& spec, const ValueProfile& profile, Rng& rng) {
  const std::size_t n = spec.num_agents();
  if (profile.size() != n) throw LengthMismatch("profile size differs from agent count");
  switch (spec.kind) {
    case MechanismKind::kSpa: return run_spa(profile, rng);
    case MechanismKind::kCsp: {
      std::vector<double> caps;
      for (const auto& a : spec.agents) caps.push_back(a.capacity);
      return run_csp(profile, caps, rng);
    }
    case MechanismKind::kMyersonOpt: return myerson_outcome(profile, dist_pointers(spec), spec.reserves, rng);
    case MechanismKind::kFpa: {
      std::vector<double> bids;
      for (std::size_t i = 0; i < n; ++i) bids.push_back(spec.curves[i].bid(profile.values[i]));
      std::size_t w = 0;
      Outcome out = highest_wins(bids, rng, w);
      out.payments[w] = bids[w];
      return out;
    }
    case MechanismKind::kMyersonAllocation: {
      Outcome out = myerson_outcome(profile, dist_pointers(spec), spec.reserves, rng);
      if (out.winner) {
        const std::size_t w = *out.winner;
        out.payments[w] = spec.curves[w].bid(profile.values[w]);
      }
      return out;
    }
    case MechanismKind::kMaxValueMinusCapacity: {
      std::vector<double> surplus;
      for (std::size_t i = 0; i < n; ++i) surplus.push_back(profile.values[i] - spec.agents[i].capacity);
      std::size_t w = 0;
      Outcome out = highest_wins(surplus, rng, w);
      out.payments[w] = spec.curves[w].bid(profile.values[w]);
      return out;
    }
  }
  throw InvalidArgument("unknown mechanism kind");
}

std::vector<double> mechanism_grid(const ValueDistribution& d, std::size_t k) {
  if (k < 2) throw InvalidArgument("mechanism grid needs k >= 2");
  const double lo = d.lower_support();
  const double hi = d.effective_upper();
  std::vector<double> g;
  g.reserve(2 * k);
  const double kd = static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) {
    g.push_back(lo + (hi - lo) * static_cast<double>(i) / (kd - 1.0));
    g.push_back(std::min(d.quantile((static_cast<double>(i) + 0.5) / kd), hi));
  }
  g.back() = std::min(g.back(), hi);
  // With an atom at the top, pin the continuous part's end so the jump in
  // allocation sits in a cell of negligible width.
  if (d.atom_at_upper() > 0.0) g.push_back(hi - 1e-9 * std::max(1.0, std::abs(hi)));
  std::sort(g.begin(), g.end());
  // Merge points closer than a relative 1e-12.
  std::vector<double> out;
  for (double v : g)
    if (out.empty() || v - out.back() > 1e-12 * std::max(1.0, std::abs(v))) out.push_back(v);
  return out;
}

FpaEquilibrium fpa_symmetric_equilibrium(const AgentSpec& agent, std::size_t n, std::size_t k) {
  const ValueDistribution& d = continuous_of(agent);
  if (d.atom_at_upper() > 0.0) throw AtomicDistribution(d.describe() + " has an atom");
  if (n < 2) throw InvalidArgument("the first-price equilibrium needs n >= 2");
  InterimAllocation a;
  const double power = static_cast<double>(n - 1);
  auto x_at = [&](double v) { return std::pow(d.cdf(v), power); };
  a.grid = mechanism_grid(d, k);
  for (double v : a.grid) a.x.push_back(x_at(v));
  if (const auto kinks = branch_switches(a, agent.capacity, x_at); !kinks.empty()) {
    a.grid = with_points(std::move(a.grid), kinks);
    a.x.clear();
    for (double v : a.grid) a.x.push_back(x_at(v));
  }
  FpaEquilibrium eq;
  eq.payment = capacitated_payment(a, agent.capacity);
  eq.bid = bid_function(a, agent.capacity);
  eq.allocation = std::move(a);
  return eq;
}

MechanismSpec make_spa(std::vector<AgentSpec> agents) {
  require_agents(agents.size());
  MechanismSpec s;
  s.kind = MechanismKind::kSpa;
  s.agents = std::move(agents);
  for (const auto& a : s.agents) (void)continuous_of(a);
  return s;
}

MechanismSpec make_csp(std::vector<AgentSpec> agents) {
  MechanismSpec s = make_spa(std::move(agents));
  s.kind = MechanismKind::kCsp;
  return s;
}

MechanismSpec make_myerson(std::vector<AgentSpec> agents) {
  MechanismSpec s = make_spa(std::move(agents));
  s.kind = MechanismKind::kMyersonOpt;
  for (std::size_t i = 0; i < s.num_agents(); ++i) s.reserves.push_back(monopoly_reserve(s.dist(i)));
  return s;
}

MechanismSpec make_fpa(const AgentSpec& agent, std::size_t n, std::size_t k) {
  FpaEquilibrium eq = fpa_symmetric_equilibrium(agent, n, k);
  MechanismSpec s;
  s.kind = MechanismKind::kFpa;
  s.agents.assign(n, agent);
  s.grid_size = k;
  s.curves.assign(n, AgentCurves{eq.allocation, eq.payment, eq.bid});
  return s;
}

MechanismSpec asym_one_priced(std::vector<AgentSpec> agents, MechanismKind which, std::size_t k) {
  if (which != MechanismKind::kMaxValueMinusCapacity && which != MechanismKind::kMyersonAllocation)
    throw InvalidArgument("asym_one_priced builds only the two one-priced direct mechanisms");
  MechanismSpec s = make_spa(std::move(agents));
  s.kind = which;
  s.grid_size = k;
  for (std::size_t i = 0; i < s.num_agents(); ++i) {
    require_regular(s.dist(i));
    if (which == MechanismKind::kMaxValueMinusCapacity && !std::isfinite(s.agents[i].capacity))
      throw UnboundedCapacity("serving the largest v - C needs finite capacities");
  }
  if (which == MechanismKind::kMyersonAllocation)
    for (std::size_t i = 0; i < s.num_agents(); ++i) s.reserves.push_back(monopoly_reserve(s.dist(i)));
  for (std::size_t i = 0; i < s.num_agents(); ++i) {
    std::vector<double> grid = mechanism_grid(s.dist(i), k);
    if (which == MechanismKind::kMyersonAllocation) insert_split(grid, s.reserves[i]);
    InterimAllocation a = allocation_on_grid(s, i, grid);
    const auto kinks = branch_switches(a, s.agents[i].capacity,
                                       [&](double v) { return interim_win_probability(s, i, v); });
    if (!kinks.empty()) a = allocation_on_grid(s, i, with_points(std::move(grid), kinks));
    s.curves.push_back(curves_for(a, s.agents[i].capacity));
  }
  return s;
}

double win_probability_with_ties(std::span<const double> below, std::span<const double> tie) {
  if (below.size() != tie.size()) throw LengthMismatch("below and tie differ in length");
  std::vector<double> e{1.0};
  for (std::size_t j = 0; j < below.size(); ++j) {
    std::vector<double> next(e.size() + 1, 0.0);
    for (std::size_t c = 0; c < e.size(); ++c) {
      next[c] += e[c] * below[j];
      next[c + 1] += e[c] * tie[j];
    }
    e = std::move(next);
  }
  double p = 0.0;
  for (std::size_t c = 0; c < e.size(); ++c) p += e[c] / static_cast<double>(c + 1);
  return p;
}

double interim_win_probability(const MechanismSpec& spec, std::size_t agent, double report) {
  const std::size_t n = spec.num_agents();
  if (agent >= n) throw InvalidArgument("agent index out of range");
  std::vector<double> below;
  std::vector<double> tie;
  switch (spec.kind) {
    case MechanismKind::kFpa:
    case MechanismKind::kSpa:
    case MechanismKind::kCsp:
      for (std::size_t j = 0; j < n; ++j) {
        if (j == agent) continue;
        const ValueDistribution& d = spec.dist(j);
        below.push_back(d.cdf_left(report));
        tie.push_back(d.cdf(report) - d.cdf_left(report));
      }
      break;
    case MechanismKind::kMyersonOpt:
    case MechanismKind::kMyersonAllocation: {
      const ValueDistribution& own = spec.dist(agent);
      if (report < spec.reserves[agent]) return 0.0;
      const double phi = phi_at(own, report);
      if (phi < -phi_tol(phi)) return 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == agent) continue;
        const auto [b, t] = lexicographic_rank(spec.dist(j), phi, report);
        below.push_back(b);
        tie.push_back(t);
      }
      break;
    }
    case MechanismKind::kMaxValueMinusCapacity:
      for (std::size_t j = 0; j < n; ++j) {
        if (j == agent) continue;
        const ValueDistribution& d = spec.dist(j);
        const double z = report - spec.agents[agent].capacity + spec.agents[j].capacity;
        below.push_back(d.cdf_left(z));
        tie.push_back(d.cdf(z) - d.cdf_left(z));
      }
      break;
  }
  return win_probability_with_ties(below, tie);
}

std::string mechanism_json(const MechanismSpec& spec) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(spec.kind);
  j["grid_size"] = spec.grid_size;
  j["agents"] = nlohmann::ordered_json::array();
  for (const auto& a : spec.agents) {
    nlohmann::ordered_json aj;
    aj["distribution"] = continuous_of(a).describe();
    if (std::isfinite(a.capacity)) aj["capacity"] = a.capacity;
    else aj["capacity"] = "inf";
    j["agents"].push_back(aj);
  }
  return j.dump(2);
}

}  // namespace capauct
