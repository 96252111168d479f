#include <benchmark/benchmark.h>

#include <random>

#include "geouio/builtin_examples.hpp"
#include "geouio/central_uio.hpp"
#include "geouio/commands.hpp"
#include "geouio/geometric.hpp"
#include "geouio/verification.hpp"

using namespace geouio;

static void BM_DecomposeCentralized(benchmark::State& state) {
    const ProjectConfig cfg = builtin_centralized();
    const Matrix bbar = cfg.partition.unknown(cfg.system.B);
    for (auto _ : state) {
        benchmark::DoNotOptimize(decompose(cfg.system.A, cfg.system.C, bbar, cfg.spectral));
    }
}
BENCHMARK(BM_DecomposeCentralized);

static void BM_SynthesizeDistributed(benchmark::State& state) {
    const ProjectConfig cfg = builtin_distributed();
    for (auto _ : state) {
        benchmark::DoNotOptimize(synthesize(cfg, TolerancePolicy{}));
    }
}
BENCHMARK(BM_SynthesizeDistributed)->Unit(benchmark::kMillisecond);

// Random draws of growing size; the draw itself is outside the timed region.
static void BM_DecomposeRandom(benchmark::State& state) {
    RandomSystemSpec spec;
    spec.max_n = state.range(0);
    spec.blind_column_rate = 0.0;
    std::mt19937_64 rng(7);
    for (auto _ : state) {
        state.PauseTiming();
        const RandomDraw d = random_system(rng, spec);
        const Matrix bbar = d.part.unknown(d.sys.B);
        state.ResumeTiming();
        try {
            benchmark::DoNotOptimize(decompose(d.sys.A, d.sys.C, bbar, SpectralPartition{}));
        } catch (const Error&) {
        }
    }
}
BENCHMARK(BM_DecomposeRandom)->Arg(3)->Arg(6)->Arg(10);

static void BM_EquivalenceBattery(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(equivalence_battery(state.range(0), 42));
    }
}
BENCHMARK(BM_EquivalenceBattery)->Arg(50)->Unit(benchmark::kMillisecond);
