#pragma once

// Benchmark task sets and the multi-worker offload scenario.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tgorder/engine.hpp"
#include "tgorder/model.hpp"
#include "tgorder/oracle.hpp"

namespace tgorder {

// Synthetic tasks T0..T7 with stage times in milliseconds (10 ms time unit).
std::vector<TaskSpec> load_table2_tasks();

struct Benchmark {
    std::string name;
    std::vector<TaskSpec> tasks;
    // Fraction of dominant-kernel tasks.
    double dk_fraction = 0.0;

    bool operator==(const Benchmark&) const = default;
};

double dk_fraction(std::span<const TaskSpec> tasks, const DeviceProfile& profile);

// BK0, BK25, BK50, BK75, BK100. Throws UnknownBenchmark for anything else.
Benchmark load_bk_benchmark(std::string_view name);
std::vector<std::string> bk_benchmark_names();

enum class RealDevice { AMD, PHI, K20 };

RealDevice real_device_from_string(std::string_view text);
std::string_view to_string(RealDevice device);

struct TimeRange {
    double min_ms = 0.0;
    double max_ms = 0.0;
};

struct RealKernelRange {
    std::string_view name;
    TimeRange htd;
    TimeRange k;
    TimeRange dth;
};

// Measured stage-time envelopes of the eight real kernels on one device.
std::span<const RealKernelRange> real_kernel_ranges(RealDevice device);

// Each task picks one of the eight kernels uniformly, then draws every stage
// uniformly within that kernel's range. Ids are "<kernel>-<index>".
std::vector<TaskSpec> sample_real_tasks(RealDevice device, std::size_t count, std::uint64_t seed);

struct Scenario {
    int workers = 1;      // T
    int batch_depth = 1;  // N
    Benchmark pool;
    std::uint64_t seed = kDefaultSeed;
    DeviceProfile profile = default_two_dma_profile();
};

// Speedups are relative to the slowest NoReorder ordering.
struct Speedups {
    double heuristic = 1.0;
    double median = 1.0;
    double best = 1.0;

    bool operator==(const Speedups&) const = default;
};

struct ScenarioResult {
    int workers = 1;
    int batch_depth = 1;
    std::string benchmark;
    std::string profile;
    std::uint64_t seed = 0;
    // tasks[w][j]: id of the j-th task of worker w.
    std::vector<std::vector<std::string>> worker_tasks;
    // Task groups in the order the proxy formed them, each already reordered.
    std::vector<std::vector<std::string>> batches;
    double heuristic_makespan_ms = 0.0;
    std::optional<PermutationReport> noreorder;
    std::optional<Speedups> speedups;

    bool operator==(const ScenarioResult&) const = default;
};

// Wall-clock cost of the reordering itself; never mixed with simulated time.
struct SchedulingOverhead {
    double total_ms = 0.0;
    double per_batch_ms = 0.0;
    std::size_t batches = 0;
};

struct ScenarioRun {
    ScenarioResult result;
    SchedulingOverhead overhead;
    Timeline timeline;
};

// Draws workers * batch_depth tasks from the pool and replays the proxy
// protocol: the pending head task of every idle worker forms a task group,
// the group is reordered and appended to the device queues, and the proxy
// polls again once the group's last HtD has started. With
// `evaluate_noreorder`, every (or a `cap`-sized sample of) round-by-round
// submission order is simulated for comparison.
ScenarioRun run_scenario(const Scenario& scenario, bool evaluate_noreorder,
                         std::size_t cap = kDefaultPermutationCap,
                         Execution execution = Execution::Parallel);

// The NoReorder submission: round j holds task j of every worker in the
// given order, and each task waits for its worker's previous task.
std::vector<TaskEntry> noreorder_entries(const std::vector<std::vector<TaskEntry>>& per_worker,
                                         std::span<const std::size_t> flat_order);

}  // namespace tgorder
