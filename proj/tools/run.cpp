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

#include <CLI11.hpp>
#include <exception>
#include <ostream>

#include "capauct/error.hpp"
#include "cli.hpp"
#include "output.hpp"

namespace capauct::cli {

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Auctions for bidders with capacitated utility: optimal LPs, equilibria, simulation."};
  app.fallthrough();
  app.require_subcommand(1);

  Flags flags;
  VerifyOptions verify_opts;
  std::uint64_t seed = 0;
  std::string out_dir;
  app.add_option("--config", flags.config_path, "JSON experiment config; flags override its fields")
      ->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "root seed for every random stream");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  app.add_option("--k", flags.k, "grid size(s)");
  app.add_option("--samples", flags.samples, "Monte-Carlo sample count(s)");
  app.add_option("--threads", flags.threads, "worker threads for simulation batches (0 = serial)");

  auto agent_flags = [&](CLI::App* sub) {
    sub->add_option("--dist", flags.dists, "value distribution, e.g. uniform:0,1 (repeat per agent)");
    sub->add_option("--capacity", flags.capacities, "capacity per agent, or one for all; 'inf' allowed");
    sub->add_option("--n", flags.n, "replicate a single distribution to n agents");
    sub->add_option("--mechanism", flags.mechanisms, "mechanism name(s)");
  };
  CLI::App* solve = app.add_subcommand("solve-lp", "optimal two-priced rules by linear programming");
  CLI::App* fpa = app.add_subcommand("fpa-eq", "symmetric first-price equilibrium and its audit");
  CLI::App* sim = app.add_subcommand("simulate", "Monte-Carlo revenue of the selected mechanisms");
  CLI::App* pay = app.add_subcommand("payment-curve", "payment identity curves of a one-priced mechanism");
  CLI::App* bnd = app.add_subcommand("bound", "expected payment against the three-term upper bound");
  CLI::App* ver = app.add_subcommand("verify", "approximation checks and invariant suite");
  for (CLI::App* sub : {solve, fpa, sim, pay, bnd, ver}) agent_flags(sub);
  ver->add_option("--inject", verify_opts.inject, "corrupt the equilibrium (bid-shift=<delta>)");
  ver->add_flag("--paper-examples", verify_opts.paper_examples, "also reproduce the worked examples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }
  if (seed_opt->count() > 0) flags.seed = seed;
  if (out_opt->count() > 0) flags.out = out_dir;

  try {
    const ExperimentConfig config = resolve(flags);
    if (solve->parsed()) return solve_lp(config, out, err);
    if (fpa->parsed()) return fpa_eq(config, out, err);
    if (sim->parsed()) return simulate(config, flags.threads, out, err);
    if (pay->parsed()) return payment_curve(config, out, err);
    if (bnd->parsed()) return bound(config, out, err);
    verify_opts.threads = flags.threads;
    return verify(config, verify_opts, out, err);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  }
}

}  // namespace capauct::cli
