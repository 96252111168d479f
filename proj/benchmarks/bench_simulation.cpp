#include <benchmark/benchmark.h>

#include "geouio/builtin_examples.hpp"
#include "geouio/commands.hpp"
#include "geouio/simulation.hpp"

using namespace geouio;

// Cost per simulated second, so range(0) is the horizon.
static void BM_SimulateCentralized(benchmark::State& state) {
    ProjectConfig cfg = builtin_centralized();
    cfg.sim.t_end = static_cast<double>(state.range(0));
    const Synthesis syn = synthesize(cfg, TolerancePolicy{});
    for (auto _ : state) benchmark::DoNotOptimize(simulate(syn));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cfg.sim.t_end / cfg.sim.dt));
}
BENCHMARK(BM_SimulateCentralized)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_SimulateDistributed(benchmark::State& state) {
    ProjectConfig cfg = builtin_distributed();
    cfg.sim.t_end = static_cast<double>(state.range(0));
    const Synthesis syn = synthesize(cfg, TolerancePolicy{});
    for (auto _ : state) benchmark::DoNotOptimize(simulate(syn));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(cfg.sim.t_end / cfg.sim.dt));
}
BENCHMARK(BM_SimulateDistributed)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
