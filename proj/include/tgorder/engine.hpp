#pragma once

// Event-driven simulator for a group of independent offloaded tasks.
//
// Every task contributes up to three commands (HtD, K, DtH) that are pushed
// into one in-order queue per command kind, in submission order. A queue
// runs at most one command at a time and only its head may start. Kernels
// never run concurrently. On a one-engine device the two transfer queues
// share the engine, and no DtH of a group starts before every HtD of that
// group has finished. On a two-engine device HtD and DtH run side by side,
// each at `overlap_sigma` of its nominal rate while both are active.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tgorder/model.hpp"

namespace tgorder {

// A task as the simulator sees it: resolved stage times plus where it sits
// in the submission stream.
struct TaskEntry {
    std::string id;
    StageTimes stages;
    // Submission batch. One-engine devices serialize transfers group by
    // group: all HtD of a group, then its DtH, then the next group.
    int group = 0;
    // No command of the task may start before this instant.
    double release_ms = 0.0;
    // Index of an earlier entry whose last command must finish before this
    // task's first command starts.
    std::optional<std::size_t> after;
};

std::vector<TaskEntry> make_entries(std::span<const TaskSpec> tasks, const DeviceProfile& profile);

struct Command {
    std::string task_id;
    CommandKind kind = CommandKind::K;
    int group = 0;
    double nominal_ms = 0.0;
    double start_ms = 0.0;
    double end_ms = 0.0;

    double duration_ms() const { return end_ms - start_ms; }

    bool operator==(const Command&) const = default;
};

struct Timeline {
    // Finalized commands in completion order.
    std::vector<Command> commands;
    double makespan_ms = 0.0;
    // Per command kind, indexed by CommandKind: gaps between the first start
    // and the last end on that queue.
    std::array<double, kCommandKinds> idle_ms{};

    double idle(CommandKind kind) const { return idle_ms[static_cast<int>(kind)]; }
    // End of the last command of `kind`, 0 when there is none.
    double last_end(CommandKind kind) const;
    const Command* find(const std::string& task_id, CommandKind kind) const;

    bool operator==(const Timeline&) const = default;
};

// Throws UnresolvableDuration if a task's stage times cannot be derived and
// InvalidArgument on an empty task list.
Timeline simulate(std::span<const TaskSpec> tasks, const DeviceProfile& profile);
Timeline simulate(std::span<const TaskEntry> entries, const DeviceProfile& profile);

// Makespan and per-kind idle times from a list of finished commands.
Timeline finalize_timeline(std::vector<Command> commands);

// A transfer in flight: its nominal duration and the fraction still to run.
struct ActiveTransfer {
    double nominal_ms = 0.0;
    double remaining_work = 1.0;
};

struct OverlapEnds {
    double htd_end_ms = 0.0;
    double dth_end_ms = 0.0;
};

// Provisional end times while an HtD and a DtH both execute on a two-engine
// device: each remaining portion is stretched by 1 / sigma. Valid until the
// next event boundary.
OverlapEnds recompute_overlap(const ActiveTransfer& htd, const ActiveTransfer& dth, double now_ms,
                              const DeviceProfile& profile);

// Chrome trace-event JSON: one complete ("X") event per command, lanes by
// command kind, integer microsecond timestamps.
std::string export_trace(const Timeline& timeline);

// Delimited text: task_id,kind,start_ms,end_ms with a header row.
std::string export_table(const Timeline& timeline);

}  // namespace tgorder
