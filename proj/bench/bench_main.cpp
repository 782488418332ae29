#include <benchmark/benchmark.h>

#include "invlab/config.hpp"
#include "invlab/experiment.hpp"
#include "invlab/inverter.hpp"

using namespace invlab;

namespace {

ExperimentConfig bench_config(int n_seeds) {
    auto cfg = default_config();
    cfg.n_seeds = n_seeds;
    return cfg;
}

void BM_Benchmark(benchmark::State& state, Execution exec) {
    const auto cfg = bench_config(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(run_benchmark(cfg, exec));
    state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<long>(cfg.methods.size()));
    state.counters["threads"] = exec == Execution::parallel ? max_threads() : 1;
}

void BM_Invert(benchmark::State& state, InversionMethod method) {
    const auto cfg = default_config();
    const auto s = cfg.schedule.build(50);
    const auto p = make_predictor(cfg, s);
    const auto z0 = gen_dataset(cfg.model, 1, cfg.rng_seed, cfg.shape).front();
    const InversionConfig ic{method, 50, {}};
    std::uint64_t evals = 0;
    for (auto _ : state) {
        auto traj = invert(s, *p, z0, cfg.condition, ic);
        evals = traj.evals;
        benchmark::DoNotOptimize(traj);
    }
    state.counters["evals"] = static_cast<double>(evals);
}

}  // namespace

BENCHMARK_CAPTURE(BM_Benchmark, serial, Execution::serial)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Benchmark, parallel, Execution::parallel)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_CAPTURE(BM_Invert, vanilla, InversionMethod{Vanilla{}})->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Invert, easyinv, InversionMethod{easyinv_preset("sdxl")})->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Invert, fixed_point_n3, InversionMethod{FixedPoint{3}})->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Invert, renoise_k2, InversionMethod{ReNoise{2}})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
