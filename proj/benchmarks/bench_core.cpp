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

#include <benchmark/benchmark.h>

#include <vector>

#include "capauct/auctions.hpp"
#include "capauct/dist.hpp"
#include "capauct/optlp.hpp"
#include "capauct/payid.hpp"
#include "capauct/sim.hpp"

namespace {

using namespace capauct;

void BM_SingleAgentLp(benchmark::State& state) {
  const AgentSpec agent{discretize(ValueDistribution::exponential(1), static_cast<std::size_t>(state.range(0))), 0.25};
  for (auto _ : state) benchmark::DoNotOptimize(optimal_two_priced(agent).revenue);
}
BENCHMARK(BM_SingleAgentLp)->Arg(20)->Arg(60)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_TwoAgentExPostLp(benchmark::State& state) {
  const AgentSpec agent{discretize(ValueDistribution::uniform(0, 1), static_cast<std::size_t>(state.range(0))), 0.25};
  const std::vector<AgentSpec> agents{agent, agent};
  for (auto _ : state) benchmark::DoNotOptimize(optimal_two_priced(agents).revenue);
}
BENCHMARK(BM_TwoAgentExPostLp)->Arg(8)->Arg(14)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_CapacitatedPayment(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  InterimAllocation a;
  for (std::size_t i = 0; i <= k; ++i) {
    const double v = static_cast<double>(i) / static_cast<double>(k);
    a.grid.push_back(v);
    a.x.push_back(v * v);
  }
  for (auto _ : state) benchmark::DoNotOptimize(capacitated_payment(a, 0.25).p.back());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(k));
}
BENCHMARK(BM_CapacitatedPayment)->Arg(2000)->Arg(100000);

void BM_FpaEquilibrium(benchmark::State& state) {
  const AgentSpec agent{ValueDistribution::exponential(1), 0.25};
  for (auto _ : state)
    benchmark::DoNotOptimize(fpa_symmetric_equilibrium(agent, 3, static_cast<std::size_t>(state.range(0))).bid(1.0));
}
BENCHMARK(BM_FpaEquilibrium)->Arg(250)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_MonteCarloRevenue(benchmark::State& state) {
  const AgentSpec agent{ValueDistribution::uniform(0, 1), 0.25};
  const MechanismSpec csp = make_csp({agent, agent, agent});
  const MechanismSpec fpa = make_fpa(agent, 3, 1000);
  const MechanismSpec& mech = state.range(0) == 0 ? csp : fpa;
  const std::size_t samples = 100000;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_revenue(mech, samples, 1, 1).mean);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(samples));
  state.SetLabel(state.range(0) == 0 ? "CSP" : "FPA");
}
BENCHMARK(BM_MonteCarloRevenue)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BestResponseGap(benchmark::State& state) {
  const MechanismSpec fpa = make_fpa({ValueDistribution::exponential(1), kInf}, 2, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(best_response_gap(fpa, 0, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_BestResponseGap)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
