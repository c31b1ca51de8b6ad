#pragma once

// Batch reordering: greedy, simulation-guided construction of a submission
// order for one task group.
//
//   1. Seed with the task that has the shortest HtD relative to its kernel.
//   2. While more than two tasks remain, try each candidate next, complete
//      the schedule with the other remaining tasks in first-task priority
//      order, and keep the candidate whose completed schedule simulates
//      shortest.
//   3. Place the final two in whichever order simulates faster, keeping the
//      shorter DtH last on ties.
//
// All functions take the task group as resolved entries and refer to tasks
// by their index into that span.

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "tgorder/engine.hpp"
#include "tgorder/model.hpp"

namespace tgorder {

using Ordering = std::vector<std::size_t>;

struct ReorderState {
    std::vector<std::size_t> remaining;
    Ordering ordered;
    // Completion time of the last command of each kind in the simulated
    // partial schedule of `ordered`.
    double t_htd_ms = 0.0;
    double t_k_ms = 0.0;
    double t_dth_ms = 0.0;
};

struct ReorderResult {
    Ordering order;
    // Snapshot after every selection, including the final one.
    std::vector<ReorderState> steps;
    // Engine invocations spent choosing the order.
    std::size_t simulations = 0;
};

// argmax(t_K - t_HtD); ties go to the longer DtH, then the smaller id.
std::size_t select_first_task(std::span<const TaskEntry> tg, std::span<const std::size_t> remaining);

// Candidate minimizing the simulated makespan of
// ordered + [candidate] + (other remaining tasks in first-task priority
// order); ties go to the smaller kernel idle time, then the smaller id.
// One engine run per candidate.
std::size_t select_next_task(std::span<const TaskEntry> tg, std::span<const std::size_t> remaining,
                             std::span<const std::size_t> ordered, const DeviceProfile& profile,
                             std::size_t* simulations = nullptr);

// Returns (before_last, last) for exactly two remaining tasks.
std::pair<std::size_t, std::size_t> select_last_tasks(std::span<const TaskEntry> tg,
                                                      std::span<const std::size_t> remaining,
                                                      std::span<const std::size_t> ordered,
                                                      const DeviceProfile& profile,
                                                      std::size_t* simulations = nullptr);

// Appends `rest` to `order` by repeated select_first_task.
void append_by_priority(std::span<const TaskEntry> tg, std::vector<std::size_t> rest,
                        Ordering& order);

ReorderResult reorder_batch(std::span<const TaskEntry> tg, const DeviceProfile& profile);

// Convenience overload: resolves the tasks, returns indices into `tg`.
Ordering reorder_batch(std::span<const TaskSpec> tg, const DeviceProfile& profile);

}  // namespace tgorder
