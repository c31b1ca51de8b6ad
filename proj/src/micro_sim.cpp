#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "tgorder/error.hpp"
#include "tgorder/oracle.hpp"

namespace tgorder {

namespace {

// Deliberately shares nothing with the event loop beyond the input types.
struct Slot {
    bool exists = false;
    bool running = false;
    bool done = false;
    double nominal_ms = 0.0;
    double left_ms = 0.0;
    double start_ms = 0.0;
    double end_ms = 0.0;
};

struct TaskState {
    Slot htd;
    Slot k;
    Slot dth;

    bool finished() const {
        return (!htd.exists || htd.done) && k.done && (!dth.exists || dth.done);
    }
};

Slot& slot(TaskState& t, CommandKind kind) {
    switch (kind) {
        case CommandKind::HtD: return t.htd;
        case CommandKind::DtH: return t.dth;
        case CommandKind::K: break;
    }
    return t.k;
}

}  // namespace

Timeline micro_simulate(std::span<const TaskEntry> entries, const DeviceProfile& profile,
                        double dt_ms) {
    if (!(dt_ms > 0.0)) throw InvalidArgument("dt must be positive");
    if (entries.empty()) throw InvalidArgument("cannot simulate an empty task group");

    const std::size_t n = entries.size();
    std::vector<TaskState> tasks(n);
    std::size_t total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const StageTimes& s = entries[i].stages;
        tasks[i].htd = Slot{s.htd_ms > 0.0, false, false, s.htd_ms, s.htd_ms};
        tasks[i].k = Slot{true, false, false, s.k_ms, s.k_ms};
        tasks[i].dth = Slot{s.dth_ms > 0.0, false, false, s.dth_ms, s.dth_ms};
        total += 1 + (s.htd_ms > 0.0) + (s.dth_ms > 0.0);
    }

    const bool one_engine = profile.dma_engines() == 1;
    const double eps = dt_ms * 1e-6;

    // In-order queue per kind: index of the next task whose command of that
    // kind has not started yet.
    auto next_in_queue = [&](CommandKind kind) -> std::size_t {
        for (std::size_t i = 0; i < n; ++i) {
            const Slot& s = slot(tasks[i], kind);
            if (s.exists && !s.running && !s.done) return i;
        }
        return n;
    };
    auto queue_busy = [&](CommandKind kind) {
        for (TaskState& t : tasks) {
            if (slot(t, kind).running) return true;
        }
        return false;
    };
    auto group_htd_done = [&](int group) {
        for (std::size_t i = 0; i < n; ++i) {
            if (entries[i].group == group && tasks[i].htd.exists && !tasks[i].htd.done) return false;
        }
        return true;
    };
    auto earlier_dth_done = [&](int group) {
        for (std::size_t i = 0; i < n; ++i) {
            if (entries[i].group < group && tasks[i].dth.exists && !tasks[i].dth.done) return false;
        }
        return true;
    };

    auto can_start = [&](std::size_t i, CommandKind kind, double now) {
        const TaskEntry& e = entries[i];
        TaskState& t = tasks[i];
        if (now + eps < e.release_ms) return false;
        if (e.after && !tasks[*e.after].finished()) return false;
        if (queue_busy(kind)) return false;
        const bool transfer_busy = queue_busy(CommandKind::HtD) || queue_busy(CommandKind::DtH);
        switch (kind) {
            case CommandKind::HtD:
                return !one_engine || (!transfer_busy && earlier_dth_done(e.group));
            case CommandKind::K:
                return !t.htd.exists || t.htd.done;
            case CommandKind::DtH:
                if (!t.k.done) return false;
                return !one_engine || (!transfer_busy && group_htd_done(e.group));
        }
        return false;
    };

    std::vector<Command> done;
    done.reserve(total);
    auto complete = [&](std::size_t i, CommandKind kind, double at) {
        Slot& s = slot(tasks[i], kind);
        s.running = false;
        s.done = true;
        s.end_ms = at;
        done.push_back(Command{entries[i].id, kind, entries[i].group, s.nominal_ms, s.start_ms, at});
    };

    // Generous bound: the fully serial schedule plus the latest release,
    // stretched by the worst overlap slowdown.
    double horizon = 0.0;
    for (const TaskEntry& e : entries) {
        horizon = std::max(horizon, e.release_ms);
        horizon += e.stages.total_ms();
    }
    horizon /= profile.overlap_sigma();
    const auto max_ticks = static_cast<std::int64_t>(std::ceil(horizon / dt_ms)) + 4 * static_cast<std::int64_t>(total) + 16;

    for (std::int64_t tick = 0; done.size() < total; ++tick) {
        if (tick > max_ticks) throw std::logic_error("reference simulation did not converge");
        const double now = static_cast<double>(tick) * dt_ms;

        // Start whatever is ready; zero-length commands complete on the spot
        // and may unlock more work at the same instant.
        for (bool changed = true; changed;) {
            changed = false;
            for (CommandKind kind : {CommandKind::HtD, CommandKind::DtH, CommandKind::K}) {
                const std::size_t i = next_in_queue(kind);
                if (i == n || !can_start(i, kind, now)) continue;
                Slot& s = slot(tasks[i], kind);
                s.running = true;
                s.start_ms = now;
                changed = true;
                if (s.left_ms <= eps) complete(i, kind, now);
            }
        }

        const bool both = !one_engine && queue_busy(CommandKind::HtD) && queue_busy(CommandKind::DtH);
        const double transfer_rate = both ? profile.overlap_sigma() : 1.0;
        const double tick_end = static_cast<double>(tick + 1) * dt_ms;
        for (std::size_t i = 0; i < n; ++i) {
            for (CommandKind kind : {CommandKind::HtD, CommandKind::DtH, CommandKind::K}) {
                Slot& s = slot(tasks[i], kind);
                if (!s.running) continue;
                s.left_ms -= dt_ms * (kind == CommandKind::K ? 1.0 : transfer_rate);
                if (s.left_ms <= eps) complete(i, kind, tick_end);
            }
        }
    }
    return finalize_timeline(std::move(done));
}

Timeline micro_simulate(std::span<const TaskSpec> tasks, const DeviceProfile& profile,
                        double dt_ms) {
    const std::vector<TaskEntry> entries = make_entries(tasks, profile);
    return micro_simulate(std::span<const TaskEntry>(entries), profile, dt_ms);
}

}  // namespace tgorder
