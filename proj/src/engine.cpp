#include "tgorder/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "tgorder/error.hpp"

namespace tgorder {

std::vector<TaskEntry> make_entries(std::span<const TaskSpec> tasks, const DeviceProfile& profile) {
    std::vector<TaskEntry> entries;
    entries.reserve(tasks.size());
    for (const TaskSpec& task : tasks) {
        entries.push_back(TaskEntry{task.id, resolve_stages(task, profile), 0, 0.0, std::nullopt});
    }
    return entries;
}

double Timeline::last_end(CommandKind kind) const {
    double end = 0.0;
    for (const Command& c : commands) {
        if (c.kind == kind) end = std::max(end, c.end_ms);
    }
    return end;
}

const Command* Timeline::find(const std::string& task_id, CommandKind kind) const {
    for (const Command& c : commands) {
        if (c.kind == kind && c.task_id == task_id) return &c;
    }
    return nullptr;
}

Timeline finalize_timeline(std::vector<Command> commands) {
    Timeline timeline;
    timeline.commands = std::move(commands);
    if (timeline.commands.empty()) return timeline;

    double first = std::numeric_limits<double>::infinity();
    double last = 0.0;
    for (int k = 0; k < kCommandKinds; ++k) {
        double lane_first = std::numeric_limits<double>::infinity();
        double lane_last = 0.0;
        double busy = 0.0;
        bool any = false;
        for (const Command& c : timeline.commands) {
            if (static_cast<int>(c.kind) != k) continue;
            any = true;
            lane_first = std::min(lane_first, c.start_ms);
            lane_last = std::max(lane_last, c.end_ms);
            busy += c.duration_ms();
        }
        if (any) timeline.idle_ms[k] = std::max(0.0, (lane_last - lane_first) - busy);
    }
    for (const Command& c : timeline.commands) {
        first = std::min(first, c.start_ms);
        last = std::max(last, c.end_ms);
    }
    timeline.makespan_ms = last - first;
    return timeline;
}

OverlapEnds recompute_overlap(const ActiveTransfer& htd, const ActiveTransfer& dth, double now_ms,
                              const DeviceProfile& profile) {
    const double sigma = profile.dma_engines() == 2 ? profile.overlap_sigma() : 1.0;
    return {now_ms + htd.remaining_work * htd.nominal_ms / sigma,
            now_ms + dth.remaining_work * dth.nominal_ms / sigma};
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct SimCommand {
    std::size_t task = 0;
    CommandKind kind = CommandKind::K;
    double nominal_ms = 0.0;
    double remaining_work = 1.0;
    bool started = false;
    bool finished = false;
    double start_ms = 0.0;
};

int lane(CommandKind kind) { return static_cast<int>(kind); }

bool reached(double now, double t) { return now + 1e-12 * std::max(1.0, std::abs(t)) >= t; }

class EventLoop {
public:
    EventLoop(std::span<const TaskEntry> entries, const DeviceProfile& profile)
        : entries_(entries), profile_(profile), task_cmds_(entries.size()) {
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const TaskEntry& e = entries_[i];
            if (e.after && *e.after >= i) {
                throw InvalidArgument("task '" + e.id + "' depends on a later or same entry");
            }
            task_cmds_[i].fill(kNone);
            if (e.stages.htd_ms > 0.0) push(i, CommandKind::HtD, e.stages.htd_ms);
            push(i, CommandKind::K, e.stages.k_ms);
            if (e.stages.dth_ms > 0.0) push(i, CommandKind::DtH, e.stages.dth_ms);
        }
    }

    Timeline run() {
        std::vector<Command> done;
        done.reserve(cmds_.size());
        double now = 0.0;

        while (done.size() < cmds_.size()) {
            start_ready(now);

            const bool overlapped = profile_.dma_engines() == 2 &&
                                    running_[lane(CommandKind::HtD)] != kNone &&
                                    running_[lane(CommandKind::DtH)] != kNone;
            std::array<double, kCommandKinds> rate{1.0, 1.0, 1.0};
            std::array<double, kCommandKinds> end{};
            end.fill(std::numeric_limits<double>::infinity());
            if (overlapped) {
                const SimCommand& h = cmds_[running_[lane(CommandKind::HtD)]];
                const SimCommand& d = cmds_[running_[lane(CommandKind::DtH)]];
                const OverlapEnds ends = recompute_overlap({h.nominal_ms, h.remaining_work},
                                                          {d.nominal_ms, d.remaining_work}, now,
                                                          profile_);
                rate[lane(CommandKind::HtD)] = rate[lane(CommandKind::DtH)] =
                    profile_.overlap_sigma();
                end[lane(CommandKind::HtD)] = ends.htd_end_ms;
                end[lane(CommandKind::DtH)] = ends.dth_end_ms;
            }
            double next = std::numeric_limits<double>::infinity();
            for (int k = 0; k < kCommandKinds; ++k) {
                if (running_[k] == kNone) continue;
                if (!overlapped || k == lane(CommandKind::K)) {
                    const SimCommand& c = cmds_[running_[k]];
                    end[k] = now + c.remaining_work * c.nominal_ms;
                }
                next = std::min(next, end[k]);
            }
            // A pending release is also an event boundary.
            for (std::size_t i = 0; i < entries_.size(); ++i) {
                const double r = entries_[i].release_ms;
                if (r > now && !reached(now, r) && !task_finished(i)) next = std::min(next, r);
            }
            if (!std::isfinite(next)) {
                throw std::logic_error("simulation stalled with unfinished commands");
            }

            const double step = next - now;
            for (int k = 0; k < kCommandKinds; ++k) {
                if (running_[k] == kNone) continue;
                SimCommand& c = cmds_[running_[k]];
                if (c.nominal_ms > 0.0) {
                    c.remaining_work =
                        std::max(0.0, c.remaining_work - step * rate[k] / c.nominal_ms);
                }
            }
            now = next;

            // Ties resolve in CommandKind order: HtD, DtH, K.
            const double eps = 1e-12 * std::max(1.0, std::abs(now));
            for (int k = 0; k < kCommandKinds; ++k) {
                if (running_[k] == kNone || end[k] > now + eps) continue;
                done.push_back(finish(running_[k], now));
                running_[k] = kNone;
            }
        }
        return finalize_timeline(std::move(done));
    }

private:
    void push(std::size_t task, CommandKind kind, double nominal) {
        const std::size_t idx = cmds_.size();
        cmds_.push_back(SimCommand{task, kind, nominal});
        queues_[lane(kind)].push_back(idx);
        task_cmds_[task][lane(kind)] = idx;
        if (kind == CommandKind::HtD) ++htd_left_[entries_[task].group];
        if (kind == CommandKind::DtH) ++dth_left_[entries_[task].group];
    }

    bool finished(std::size_t task, CommandKind kind) const {
        const std::size_t idx = task_cmds_[task][lane(kind)];
        return idx == kNone || cmds_[idx].finished;
    }

    bool task_finished(std::size_t task) const {
        return finished(task, CommandKind::HtD) && finished(task, CommandKind::K) &&
               finished(task, CommandKind::DtH);
    }

    bool htd_pending(int group) const {
        const auto it = htd_left_.find(group);
        return it != htd_left_.end() && it->second > 0;
    }

    bool earlier_groups_drained(int group) const {
        for (const auto& [g, left] : dth_left_) {
            if (g >= group) break;
            if (left > 0) return false;
        }
        return true;
    }

    bool ready(std::size_t idx, double now) const {
        const SimCommand& c = cmds_[idx];
        const TaskEntry& e = entries_[c.task];
        if (!reached(now, e.release_ms)) return false;
        if (e.after && !task_finished(*e.after)) return false;

        const bool single_engine = profile_.dma_engines() == 1;
        const bool transfer_busy = running_[lane(CommandKind::HtD)] != kNone ||
                                   running_[lane(CommandKind::DtH)] != kNone;
        switch (c.kind) {
            case CommandKind::HtD:
                if (single_engine && (transfer_busy || !earlier_groups_drained(e.group))) {
                    return false;
                }
                return true;
            case CommandKind::K:
                return finished(c.task, CommandKind::HtD);
            case CommandKind::DtH:
                if (!finished(c.task, CommandKind::K)) return false;
                if (single_engine && (transfer_busy || htd_pending(e.group))) return false;
                return true;
        }
        return false;
    }

    void start_ready(double now) {
        for (int k = 0; k < kCommandKinds; ++k) {
            if (running_[k] != kNone || head_[k] >= queues_[k].size()) continue;
            const std::size_t idx = queues_[k][head_[k]];
            if (!ready(idx, now)) continue;
            cmds_[idx].started = true;
            cmds_[idx].start_ms = now;
            running_[k] = idx;
            ++head_[k];
        }
    }

    Command finish(std::size_t idx, double now) {
        SimCommand& c = cmds_[idx];
        c.finished = true;
        c.remaining_work = 0.0;
        const TaskEntry& e = entries_[c.task];
        if (c.kind == CommandKind::HtD) --htd_left_[e.group];
        if (c.kind == CommandKind::DtH) --dth_left_[e.group];
        return Command{e.id, c.kind, e.group, c.nominal_ms, c.start_ms, now};
    }

    std::span<const TaskEntry> entries_;
    const DeviceProfile& profile_;
    std::vector<SimCommand> cmds_;
    std::vector<std::array<std::size_t, kCommandKinds>> task_cmds_;
    std::array<std::vector<std::size_t>, kCommandKinds> queues_;
    std::array<std::size_t, kCommandKinds> head_{};
    std::array<std::size_t, kCommandKinds> running_{kNone, kNone, kNone};
    std::map<int, int> htd_left_;
    std::map<int, int> dth_left_;
};

}  // namespace

Timeline simulate(std::span<const TaskEntry> entries, const DeviceProfile& profile) {
    if (entries.empty()) throw InvalidArgument("cannot simulate an empty task group");
    return EventLoop(entries, profile).run();
}

Timeline simulate(std::span<const TaskSpec> tasks, const DeviceProfile& profile) {
    if (tasks.empty()) throw InvalidArgument("cannot simulate an empty task group");
    const std::vector<TaskEntry> entries = make_entries(tasks, profile);
    return simulate(std::span<const TaskEntry>(entries), profile);
}

}  // namespace tgorder
