#pragma once

// Ground truth for the event-driven engine: a fixed-step reference
// simulator written from the queue rules alone, and a brute-force sweep
// over task orderings.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tgorder/engine.hpp"
#include "tgorder/model.hpp"

namespace tgorder {

inline constexpr double kDefaultOracleStepMs = 0.001;
inline constexpr std::size_t kDefaultPermutationCap = 10000;
inline constexpr std::uint64_t kDefaultSeed = 42;

// Advances a clock in `dt_ms` ticks. Commands start on tick boundaries and
// finish at the end of the tick in which their remaining work runs out, so
// every start and end is a multiple of dt. Throws InvalidArgument if
// dt_ms <= 0.
Timeline micro_simulate(std::span<const TaskEntry> entries, const DeviceProfile& profile,
                        double dt_ms = kDefaultOracleStepMs);
Timeline micro_simulate(std::span<const TaskSpec> tasks, const DeviceProfile& profile,
                        double dt_ms = kDefaultOracleStepMs);

struct PermutationEntry {
    std::vector<std::string> order;
    double makespan_ms = 0.0;

    bool operator==(const PermutationEntry&) const = default;
};

struct PermutationReport {
    std::vector<PermutationEntry> entries;
    std::size_t best_index = 0;
    double best_ms = 0.0;
    double worst_ms = 0.0;
    double median_ms = 0.0;
    double geomean_ms = 0.0;
    // Size of the full ordering space (saturates at UINT64_MAX).
    std::uint64_t total_orderings = 0;
    // True when `entries` is a random subset of the space.
    bool sampled = false;

    const PermutationEntry& best() const { return entries.at(best_index); }
    // Percentage of evaluated orderings strictly faster than `makespan_ms`.
    double percentile_of(double makespan_ms) const;

    bool operator==(const PermutationReport&) const = default;
};

// Recomputes best/worst/median/geomean from `entries`. The best entry is the
// first one, in entry order, with the minimal makespan.
void summarize(PermutationReport& report);

// An ordering space made of consecutive groups, each permuted independently.
// A flat ordering lists global item indices, group 0 first.
struct OrderingSpace {
    std::vector<std::size_t> group_sizes;

    std::size_t items() const;
    // Product of the group factorials, saturating at UINT64_MAX.
    std::uint64_t count() const;
};

// Every ordering in lexicographic order when count() <= cap, otherwise `cap`
// distinct orderings drawn uniformly without replacement from a generator
// seeded with `seed`, returned in lexicographic order.
std::vector<std::vector<std::size_t>> enumerate_orderings(const OrderingSpace& space,
                                                          std::size_t cap, std::uint64_t seed);

enum class Execution { Serial, Parallel };

// Must be safe to call concurrently.
using OrderingEvaluator = std::function<double(std::span<const std::size_t> order)>;

PermutationReport evaluate_orderings(const std::vector<std::vector<std::size_t>>& orderings,
                                     std::span<const std::string> ids,
                                     const OrderingEvaluator& evaluate, Execution execution);

PermutationReport exhaustive_search(std::span<const TaskSpec> tasks, const DeviceProfile& profile,
                                    std::size_t cap = kDefaultPermutationCap,
                                    std::uint64_t seed = kDefaultSeed,
                                    Execution execution = Execution::Parallel);

struct CrossCheck {
    std::size_t orderings = 0;
    double max_abs_deviation_ms = 0.0;
    // |engine - reference| / engine makespan, maximized over orderings.
    double max_rel_deviation = 0.0;
};

// Runs every ordering of `tasks` through both simulate() and
// micro_simulate() and reports the largest makespan disagreement.
CrossCheck cross_check(std::span<const TaskSpec> tasks, const DeviceProfile& profile, double dt_ms,
                       std::size_t cap = kDefaultPermutationCap, std::uint64_t seed = kDefaultSeed,
                       Execution execution = Execution::Parallel);

}  // namespace tgorder
