// Serial vs OpenMP ordering sweeps. Both paths fill the same report, so the
// comparison is pure throughput.

#include <benchmark/benchmark.h>

#include "tgorder/oracle.hpp"
#include "tgorder/workload.hpp"

namespace {

using namespace tgorder;

Execution mode(const benchmark::State& state) {
    return state.range(0) == 0 ? Execution::Serial : Execution::Parallel;
}

void BM_ExhaustiveSearch(benchmark::State& state) {
    const auto tasks = sample_real_tasks(RealDevice::K20, static_cast<std::size_t>(state.range(1)), 1);
    const DeviceProfile profile = default_two_dma_profile();
    for (auto _ : state) {
        benchmark::DoNotOptimize(exhaustive_search(tasks, profile, kDefaultPermutationCap, kDefaultSeed, mode(state)));
    }
    state.SetLabel(mode(state) == Execution::Serial ? "serial" : "parallel");
}
BENCHMARK(BM_ExhaustiveSearch)->ArgsProduct({{0, 1}, {6, 7, 8}})->Unit(benchmark::kMillisecond);

void BM_CrossCheck(benchmark::State& state) {
    const auto tasks = load_bk_benchmark("BK50").tasks;
    const DeviceProfile profile = default_two_dma_profile();
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            cross_check(tasks, profile, kDefaultOracleStepMs, kDefaultPermutationCap, kDefaultSeed, mode(state)));
    }
    state.SetLabel(mode(state) == Execution::Serial ? "serial" : "parallel");
}
BENCHMARK(BM_CrossCheck)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ScenarioNoReorder(benchmark::State& state) {
    Scenario s;
    s.workers = 4;
    s.batch_depth = 2;
    s.pool = load_bk_benchmark("BK50");
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_scenario(s, true, kDefaultPermutationCap, mode(state)));
    }
    state.SetLabel(mode(state) == Execution::Serial ? "serial" : "parallel");
}
BENCHMARK(BM_ScenarioNoReorder)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
