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

// Acceptance runner. Criteria that are cheap to evaluate are computed here
// against independent oracles; the instance matrix is evaluated from the raw
// estimates the `capauct verify` run writes, which also provides the
// end-to-end runtime measurement.
//
// Usage: capauct_acceptance <capauct binary> <work dir> [--expect-red 7,...]
// Exit status is 0 when exactly the listed criteria fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "capauct/auctions.hpp"
#include "capauct/config.hpp"
#include "capauct/csv.hpp"
#include "capauct/dist.hpp"
#include "capauct/optlp.hpp"
#include "capauct/payid.hpp"
#include "capauct/sim.hpp"
#include "capauct/two_price.hpp"
#include "oracles.hpp"
#include "rules.hpp"

namespace fs = std::filesystem;
using namespace capauct;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  explicit Verdict(std::string i, bool p = true, std::string d = {})
      : id(std::move(i)), pass(p), detail(std::move(d)) {}

  std::string id;
  bool pass;
  std::string detail;
};

class Ledger {
 public:
  void record(Verdict v) {
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.id << ": " << v.detail << std::endl;
    verdicts_.push_back(std::move(v));
  }
  std::set<std::string> failed() const {
    std::set<std::string> out;
    for (const auto& v : verdicts_)
      if (!v.pass) out.insert(v.id);
    return out;
  }

 private:
  std::vector<Verdict> verdicts_;
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// ---------------------------------------------------------------- direct

Verdict criterion1() {
  const auto t0 = Clock::now();
  const DiscreteTypeSpace space = discretize(ValueDistribution::equal_revenue(1000), 10000);
  const TwoPricedRule rule = cli::linear_lottery(space, 1000.0, 0.6, 0.6 / 1000.0, 1.0);
  const double revenue = expected_payment(rule, space.masses);
  const double elapsed = seconds_since(t0);
  const double quad = oracle::lottery_revenue_quadrature();
  Verdict v{"1"};
  v.pass = std::abs(revenue - 1.55) <= 0.02 && std::abs(quad - 1.55) <= 0.02 && elapsed < 1.0 && check_bic(rule).ok();
  v.detail = "lottery revenue " + fmt(revenue) + " (Simpson oracle " + fmt(quad) + ") vs 1.55 +- 0.02 in " +
             fmt(elapsed) + " s";
  return v;
}

Verdict criterion2() {
  Verdict v{"2"};
  std::ostringstream d;
  for (double h : {100.0, 1000.0}) {
    const DiscreteTypeSpace space = discretize(ValueDistribution::equal_revenue(h), 100000);
    const double always = expected_payment(cli::sell_always(space, 1.0), space.masses);
    const double neutral = expected_payment(posted_price_rule(space, kInf), space.masses);
    v.pass = v.pass && std::abs(always - std::log(h)) <= 0.02 && std::abs(neutral - 1.0) <= 0.01;
    d << "h=" << h << ": sell-always " << fmt(always) << " vs ln h " << fmt(std::log(h)) << ", risk-neutral "
      << fmt(neutral) << "; ";
  }
  v.detail = d.str();
  return v;
}

Verdict criterion3() {
  TwoPricedRule r;
  r.grid = {3.0, 4.0};
  r.capacity = 2.0;
  r.qv = {1.0 / 3.0, 0.0};
  r.qc = {0.5, 2.0 / 3.0};
  // Closest doubles to the table's rationals; exact rational arithmetic lands
  // on them to within one rounding per operation.
  const double want[4] = {1.0, 2.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0};
  const double got[4] = {utility_of_report(r, 3, 3), utility_of_report(r, 3, 4), utility_of_report(r, 4, 4),
                         utility_of_report(r, 4, 3)};
  Verdict v{"3"};
  v.pass = check_bic(r).ok();
  for (int i = 0; i < 4; ++i) v.pass = v.pass && std::abs(got[i] - want[i]) <= 4 * std::numeric_limits<double>::epsilon();
  const double q3 = r.qv[0] + r.qc[0], q4 = r.qv[1] + r.qc[1];
  v.pass = v.pass && std::abs(q3 - 5.0 / 6.0) < 1e-15 && q3 > q4;
  v.detail = "check_bic ok, utilities (" + fmt(got[0]) + ", " + fmt(got[1]) + ", " + fmt(got[2]) + ", " +
             fmt(got[3]) + "), q(3)=" + fmt(q3) + " > q(4)=" + fmt(q4);
  return v;
}

Verdict criterion4() {
  const auto t0 = Clock::now();
  Verdict v{"4"};
  double worst_margin = std::numeric_limits<double>::infinity();
  int rules = 0;
  struct Case {
    const char* dist;
    double capacity;
  };
  for (const Case& c : {Case{"equal_revenue:h=100", 1.0}, Case{"equal_revenue:h=1000", 1.0},
                        Case{"equal_revenue:h=1000", 1000.0}, Case{"uniform:0,1", 0.05}, Case{"uniform:0,1", 0.25},
                        Case{"uniform:0,1", 1.0}, Case{"uniform:0,1", kInf}, Case{"exponential:rate=1", 0.25},
                        Case{"exponential:rate=1", kInf}}) {
    const DiscreteTypeSpace space = discretize(parse_distribution(c.dist), 60);
    const AgentSpec agent{space, c.capacity};
    const double lp = optimal_two_priced(agent).revenue;
    const double cap = lp_capacity(agent);
    for (const TwoPricedRule& r : {cli::sell_always(space, cap), cli::linear_lottery(space, cap, 0.6, 0.6 / 1000.0, 1.0),
                                   posted_price_rule(space, cap)}) {
      if (!check_bic(r).ok()) continue;
      ++rules;
      worst_margin = std::min(worst_margin, lp - expected_payment(r, space.masses));
    }
  }
  v.pass = worst_margin >= -1e-6;
  // Tiny type spaces against exhaustive search on the 1/20 grid.
  Rng rng(derive_seed(2, 4));
  double worst_beat = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 24; ++trial) {
    const std::size_t n = 1 + trial % 3;
    DiscreteTypeSpace t;
    double value = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      value += 0.1 + rng.uniform();
      t.values.push_back(value);
      t.masses.push_back(0.2 + rng.uniform());
      total += t.masses.back();
    }
    for (double& m : t.masses) m /= total;
    const double cap = 0.1 + 2.0 * rng.uniform();
    const double lp = optimal_two_priced(AgentSpec{t, cap}).revenue;
    worst_beat = std::max(worst_beat, (oracle::brute_force_revenue(t, cap) - lp) / t.values.back());
  }
  const double elapsed = seconds_since(t0);
  v.pass = v.pass && worst_beat <= 0.15 && elapsed < 30.0;
  v.detail = std::to_string(rules) + " feasible rules, min LP margin " + fmt(worst_margin) +
             "; brute force beats LP by at most " + fmt(worst_beat) + " v_max over 24 tiny spaces; " + fmt(elapsed) +
             " s";
  return v;
}

Verdict criterion8() {
  Verdict v{"8"};
  std::ostringstream d;
  for (std::size_t k : {250, 1000, 2000}) {
    InterimAllocation a;
    for (std::size_t i = 0; i <= k; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(k);
      a.grid.push_back(x);
      a.x.push_back(x);
    }
    const PaymentCurve p = capacitated_payment(a, 0.25);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      worst = std::max(worst, std::abs(p.p[i] - oracle::uniform_pair_payment(a.grid[i])));
    v.pass = v.pass && worst <= 2.0 / static_cast<double>(k);
    d << "k=" << k << " max err " << fmt(worst) << "; ";
  }
  const MechanismSpec fpa = make_fpa(AgentSpec{ValueDistribution::uniform(0, 1), 0.25}, 2, 2000);
  const RevenueEstimate est = estimate_revenue(fpa, 1000000, derive_seed(8, 1));
  v.pass = v.pass && std::abs(est.mean - 0.4375) <= 0.002;
  d << "FPA revenue " << fmt(est.mean) << " +- " << fmt(est.half_width_95) << " vs 0.4375";
  v.detail = d.str();
  return v;
}

// ---------------------------------------------------------------- verify run

struct Row {
  std::string section, instance, check;
  double value = 0.0;
  std::string relation;
  double limit = 0.0;
};

std::vector<Row> read_rows(const fs::path& p) {
  std::ifstream in(p);
  const csv::Table t = csv::read(in);
  std::vector<Row> rows;
  for (const auto& r : t.rows)
    rows.push_back({r[0], r[1], r[2], std::stod(r[3]), r[4], std::stod(r[5])});
  return rows;
}

bool holds(const Row& r) {
  if (r.relation == "<=") return r.value <= r.limit;
  if (r.relation == ">=") return r.value >= r.limit;
  if (r.relation == "==") return r.value == r.limit;
  if (r.relation.size() > 1 && r.relation[0] == '~') return std::abs(r.value - r.limit) <= std::stod(r.relation.substr(1));
  return false;
}

struct Estimate {
  double mean = 0.0;
  double hw = 0.0;
};

struct Report {
  std::string instance;
  double opt = 0.0;
  double opt_hw = 0.0;
  std::map<std::string, Estimate> mech;
};

// Matrix reports in index order, labelled from the verify rows.
std::vector<Report> read_matrix(const fs::path& dir, const std::vector<Row>& rows) {
  std::vector<std::string> names;
  for (const auto& r : rows)
    if (r.section == "matrix" && (names.empty() || names.back() != r.instance)) names.push_back(r.instance);
  std::vector<Report> out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::ifstream in(dir / "reports" / ("instance" + std::to_string(i) + ".json"));
    const auto j = nlohmann::json::parse(in);
    Report rep;
    rep.instance = names[i];
    rep.opt = j.at("opt_revenue");
    rep.opt_hw = j.at("opt_half_width");
    for (const auto& c : j.at("candidates")) rep.mech[c.at("name")] = {c.at("revenue"), c.at("half_width_95")};
    out.push_back(std::move(rep));
  }
  return out;
}

Verdict criterion5(const std::vector<Report>& reps) {
  Verdict v{"5"};
  int fails = 0;
  double worst = 0.0;
  for (const auto& r : reps) {
    const Estimate& my = r.mech.at("MyersonOpt");
    const Estimate& csp = r.mech.at("CSP");
    const Estimate& best = my.mean >= csp.mean ? my : csp;
    const bool ok = r.opt <= 3.0 * best.mean + 3.0 * (best.hw + r.opt_hw);
    fails += !ok;
    worst = std::max(worst, r.opt / best.mean);
  }
  v.pass = fails == 0 && reps.size() == 24;
  v.detail = std::to_string(reps.size()) + " instances, " + std::to_string(fails) +
             " failures, worst OPT / max(Myerson, CSP) = " + fmt(worst);
  return v;
}

Verdict criterion6(const std::vector<Report>& reps) {
  Verdict v{"6"};
  int checked = 0, fails = 0;
  double worst = 0.0;
  for (const auto& r : reps) {
    const auto it = r.mech.find("FPA");
    if (it == r.mech.end()) continue;
    ++checked;
    fails += it->second.mean < r.opt / 5.0 - 3.0 * (it->second.hw + r.opt_hw);
    worst = std::max(worst, r.opt / it->second.mean);
  }
  v.pass = fails == 0 && checked == 16;
  v.detail = std::to_string(checked) + " instances with an FPA equilibrium (equal-revenue rows have an atom and no "
             "pure symmetric equilibrium), " + std::to_string(fails) + " failures, worst OPT / FPA = " + fmt(worst);
  return v;
}

Verdict criterion7(const std::vector<Report>& reps) {
  Verdict v{"7"};
  int checked = 0, spa_fails = 0, csp_fails = 0;
  std::string first;
  for (const auto& r : reps) {
    const auto it = r.mech.find("FPA");
    if (it == r.mech.end()) continue;
    ++checked;
    const Estimate& f = it->second;
    for (const char* other : {"SPA", "CSP"}) {
      const Estimate& o = r.mech.at(other);
      if (f.mean >= o.mean - 3.0 * std::hypot(f.hw, o.hw)) continue;
      (std::string(other) == "SPA" ? spa_fails : csp_fails)++;
      if (first.empty())
        first = r.instance + " FPA " + fmt(f.mean) + " < " + other + " " + fmt(o.mean);
    }
  }
  v.pass = spa_fails == 0 && csp_fails == 0 && checked == 16;
  v.detail = std::to_string(checked) + " instances; FPA < SPA on " + std::to_string(spa_fails) + ", FPA < CSP on " +
             std::to_string(csp_fails) + (first.empty() ? "" : " (e.g. " + first + ")");
  return v;
}

Verdict criterion9(const std::vector<Row>& rows) {
  Verdict v{"9"};
  int at2000 = 0, sequences = 0, strict = 0, floored = 0, fails = 0;
  double worst = 0.0;
  constexpr double kFloor = 1e-9;
  for (const auto& r : rows) {
    if (r.section != "ic-audit") continue;
    if (r.check.find("gap k=2000") != std::string::npos) {
      ++at2000;
      worst = std::max(worst, r.value);
      fails += r.value > 0.01;
    }
    const auto pos = r.check.find("gaps k=250/1000/2000: ");
    if (pos == std::string::npos) continue;
    ++sequences;
    std::istringstream in(r.check.substr(pos + 22));
    double g1, g2, g3;
    in >> g1 >> g2 >> g3;
    if (g1 > g2 && g2 > g3) {
      ++strict;
    } else if (std::max({g1, g2, g3}) <= kFloor) {
      ++floored;
    } else {
      ++fails;
    }
  }
  v.pass = fails == 0 && at2000 > 0 && sequences > 0;
  v.detail = std::to_string(at2000) + " audits at k=2000, worst gap " + fmt(worst) + "; " + std::to_string(sequences) +
             " sequences: " + std::to_string(strict) + " strictly decreasing, " + std::to_string(floored) +
             " at roundoff (<= 1e-9) for every k, " + std::to_string(fails) + " failures";
  return v;
}

Verdict section_rows(const std::string& id, const std::vector<Row>& rows, const std::string& section,
                     const std::string& what) {
  Verdict v{id};
  int n = 0, fails = 0;
  std::string first;
  for (const auto& r : rows) {
    if (r.section != section) continue;
    ++n;
    if (!holds(r)) {
      ++fails;
      if (first.empty()) first = r.instance + ": " + r.check;
    }
  }
  v.pass = n > 0 && fails == 0;
  v.detail = what + ": " + std::to_string(n) + " checks, " + std::to_string(fails) + " failures" +
             (first.empty() ? "" : " (first: " + first + ")");
  return v;
}

Verdict criterion11(const std::vector<Row>& rows) {
  Verdict v = section_rows("11", rows, "bulow-klemperer", "uniform and exponential, n = 1..3");
  const std::vector<AgentSpec> one{{ValueDistribution::uniform(0, 1), kInf}};
  const std::vector<AgentSpec> two(2, one.front());
  const RevenueEstimate spa2 = estimate_revenue(make_spa(two), 1000000, derive_seed(11, 1));
  const RevenueEstimate my1 = estimate_revenue(make_myerson(one), 1000000, derive_seed(11, 2));
  const bool closed = std::abs(spa2.mean - 1.0 / 3.0) <= 3 * spa2.half_width_95 &&
                      std::abs(my1.mean - 0.25) <= 3 * my1.half_width_95 && spa2.mean >= my1.mean;
  v.pass = v.pass && closed;
  v.detail += "; SPA2 " + fmt(spa2.mean) + " vs 1/3, Myerson1 " + fmt(my1.mean) + " vs 1/4";
  return v;
}

Verdict criterion12(const fs::path& dir) {
  Verdict v{"12"};
  std::ostringstream d;
  for (int j = 0; j < 2; ++j) {
    std::ifstream in(dir / "reports" / ("asymmetric" + std::to_string(j) + ".csv"));
    const csv::Table t = csv::read(in);
    double opt = 0.0, best = 0.0, best_hw = 0.0;
    for (const auto& r : t.rows) {
      if (r[0].rfind("OPT", 0) == 0) opt = std::stod(r[1]);
      if (r[0] == "MyersonOpt" || r[0] == "MyersonAlloc-OnePriced" || r[0] == "MaxVMinusC-OnePriced") {
        if (std::stod(r[1]) > best) {
          best = std::stod(r[1]);
          best_hw = std::stod(r[2]);
        }
      }
    }
    v.pass = v.pass && opt > 0.0 && best >= opt / 3.0 - 3.0 * best_hw;
    d << "case " << j << ": best " << fmt(best) << " vs OPT/3 " << fmt(opt / 3.0) << "; ";
  }
  v.detail = d.str();
  return v;
}

std::set<std::string> parse_ids(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string id;
  while (std::getline(ss, id, ','))
    if (!id.empty()) out.insert(id);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: capauct_acceptance <capauct binary> <work dir> [--expect-red ids]\n";
    return 2;
  }
  const std::string binary = argv[1];
  const fs::path work = argv[2];
  std::set<std::string> expect_red;
  for (int i = 3; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--expect-red") expect_red = parse_ids(argv[i + 1]);

  Ledger ledger;
  ledger.record(criterion1());
  ledger.record(criterion2());
  ledger.record(criterion3());
  ledger.record(criterion4());

  fs::remove_all(work);
  fs::create_directories(work);
  const std::string cmd =
      "\"" + binary + "\" verify --paper-examples --out \"" + work.string() + "\" > \"" + (work / "verify.log").string() + "\" 2>&1";
  const auto t0 = Clock::now();
  const int raw = std::system(cmd.c_str());
  const double elapsed = seconds_since(t0);
  const int status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  const auto rows = read_rows(work / "verify.csv");
  const auto reps = read_matrix(work, rows);

  ledger.record(criterion5(reps));
  ledger.record(criterion6(reps));
  ledger.record(criterion7(reps));
  ledger.record(criterion8());
  ledger.record(criterion9(rows));
  ledger.record(section_rows("10", rows, "qbar", "100 random BIC rules per distribution"));
  ledger.record(criterion11(rows));
  ledger.record(criterion12(work));
  ledger.record(Verdict{"runtime", status == 0 && elapsed < 600.0,
                 "verify --paper-examples exit " + std::to_string(status) + " in " + fmt(elapsed) + " s (< 600 s)"});

  const std::set<std::string> red = ledger.failed();
  std::cout << "acceptance: " << red.size() << " criteria red";
  for (const auto& id : red) std::cout << ' ' << id;
  std::cout << std::endl;
  if (red != expect_red) {
    std::cout << "acceptance: red set differs from the expected set" << std::endl;
    return 1;
  }
  return 0;
}
