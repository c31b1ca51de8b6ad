#include "tgorder/heuristic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tgorder/error.hpp"

namespace tgorder {

namespace {

bool same_time(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

Timeline simulate_order(std::span<const TaskEntry> tg, std::span<const std::size_t> order,
                        const DeviceProfile& profile) {
    std::vector<TaskEntry> entries;
    entries.reserve(order.size());
    for (std::size_t idx : order) {
        TaskEntry e = tg[idx];
        e.group = 0;
        e.release_ms = 0.0;
        e.after.reset();
        entries.push_back(std::move(e));
    }
    return simulate(std::span<const TaskEntry>(entries), profile);
}

ReorderState snapshot(std::span<const TaskEntry> tg, const std::vector<std::size_t>& remaining,
                      const Ordering& ordered, const DeviceProfile& profile,
                      std::size_t& simulations) {
    ReorderState state{remaining, ordered};
    if (!ordered.empty()) {
        const Timeline t = simulate_order(tg, ordered, profile);
        ++simulations;
        state.t_htd_ms = t.last_end(CommandKind::HtD);
        state.t_k_ms = t.last_end(CommandKind::K);
        state.t_dth_ms = t.last_end(CommandKind::DtH);
    }
    return state;
}

void erase_value(std::vector<std::size_t>& v, std::size_t value) {
    v.erase(std::find(v.begin(), v.end(), value));
}

}  // namespace

// Drains `rest` into `order`, highest first-task priority first.
void append_by_priority(std::span<const TaskEntry> tg, std::vector<std::size_t> rest,
                        Ordering& order) {
    while (!rest.empty()) {
        const std::size_t pick = select_first_task(tg, rest);
        order.push_back(pick);
        erase_value(rest, pick);
    }
}

std::size_t select_first_task(std::span<const TaskEntry> tg, std::span<const std::size_t> remaining) {
    if (remaining.empty()) throw InvalidArgument("select_first_task: no remaining tasks");
    std::size_t best = remaining.front();
    for (std::size_t idx : remaining.subspan(1)) {
        const StageTimes& c = tg[idx].stages;
        const StageTimes& b = tg[best].stages;
        const double score_c = c.k_ms - c.htd_ms;
        const double score_b = b.k_ms - b.htd_ms;
        if (!same_time(score_c, score_b)) {
            if (score_c > score_b) best = idx;
        } else if (!same_time(c.dth_ms, b.dth_ms)) {
            if (c.dth_ms > b.dth_ms) best = idx;
        } else if (tg[idx].id < tg[best].id) {
            best = idx;
        }
    }
    return best;
}

std::size_t select_next_task(std::span<const TaskEntry> tg, std::span<const std::size_t> remaining,
                             std::span<const std::size_t> ordered, const DeviceProfile& profile,
                             std::size_t* simulations) {
    if (remaining.empty()) throw InvalidArgument("select_next_task: no remaining tasks");
    if (remaining.size() == 1) return remaining.front();

    std::size_t best = remaining.front();
    double best_span = 0.0;
    double best_idle = 0.0;
    bool first = true;
    for (std::size_t idx : remaining) {
        Ordering trial(ordered.begin(), ordered.end());
        trial.push_back(idx);
        std::vector<std::size_t> rest(remaining.begin(), remaining.end());
        erase_value(rest, idx);
        append_by_priority(tg, rest, trial);
        const Timeline t = simulate_order(tg, trial, profile);
        if (simulations) ++*simulations;
        const double span = t.makespan_ms;
        const double idle = t.idle(CommandKind::K);
        bool take = first;
        if (!first) {
            if (!same_time(span, best_span)) {
                take = span < best_span;
            } else if (!same_time(idle, best_idle)) {
                take = idle < best_idle;
            } else {
                take = tg[idx].id < tg[best].id;
            }
        }
        if (take) {
            best = idx;
            best_span = span;
            best_idle = idle;
        }
        first = false;
    }
    return best;
}

std::pair<std::size_t, std::size_t> select_last_tasks(std::span<const TaskEntry> tg,
                                                      std::span<const std::size_t> remaining,
                                                      std::span<const std::size_t> ordered,
                                                      const DeviceProfile& profile,
                                                      std::size_t* simulations) {
    if (remaining.size() != 2) throw InvalidArgument("select_last_tasks needs exactly two tasks");
    const std::size_t a = remaining[0];
    const std::size_t b = remaining[1];

    Ordering ab(ordered.begin(), ordered.end());
    ab.push_back(a);
    ab.push_back(b);
    Ordering ba(ordered.begin(), ordered.end());
    ba.push_back(b);
    ba.push_back(a);
    const double span_ab = simulate_order(tg, ab, profile).makespan_ms;
    const double span_ba = simulate_order(tg, ba, profile).makespan_ms;
    if (simulations) *simulations += 2;

    if (!same_time(span_ab, span_ba)) {
        return span_ab < span_ba ? std::pair{a, b} : std::pair{b, a};
    }
    // Equal makespans: the shorter DtH goes last.
    const double dth_a = tg[a].stages.dth_ms;
    const double dth_b = tg[b].stages.dth_ms;
    if (!same_time(dth_a, dth_b)) {
        return dth_a < dth_b ? std::pair{b, a} : std::pair{a, b};
    }
    return tg[a].id <= tg[b].id ? std::pair{a, b} : std::pair{b, a};
}

ReorderResult reorder_batch(std::span<const TaskEntry> tg, const DeviceProfile& profile) {
    if (tg.empty()) throw InvalidArgument("reorder_batch: empty task group");

    ReorderResult result;
    std::vector<std::size_t> remaining(tg.size());
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});
    Ordering ordered;

    if (tg.size() == 2) {
        const auto [before_last, last] = select_last_tasks(tg, remaining, ordered, profile,
                                                           &result.simulations);
        ordered = {before_last, last};
        remaining.clear();
        result.steps.push_back(snapshot(tg, remaining, ordered, profile, result.simulations));
        result.order = std::move(ordered);
        return result;
    }

    const std::size_t initial = select_first_task(tg, remaining);
    ordered.push_back(initial);
    erase_value(remaining, initial);
    result.steps.push_back(snapshot(tg, remaining, ordered, profile, result.simulations));

    while (remaining.size() > 2) {
        const std::size_t next =
            select_next_task(tg, remaining, ordered, profile, &result.simulations);
        ordered.push_back(next);
        erase_value(remaining, next);
        result.steps.push_back(snapshot(tg, remaining, ordered, profile, result.simulations));
    }

    if (remaining.size() == 2) {
        const auto [before_last, last] = select_last_tasks(tg, remaining, ordered, profile,
                                                           &result.simulations);
        ordered.push_back(before_last);
        ordered.push_back(last);
        remaining.clear();
        result.steps.push_back(snapshot(tg, remaining, ordered, profile, result.simulations));
    }
    result.order = std::move(ordered);
    return result;
}

Ordering reorder_batch(std::span<const TaskSpec> tg, const DeviceProfile& profile) {
    const std::vector<TaskEntry> entries = make_entries(tg, profile);
    return reorder_batch(std::span<const TaskEntry>(entries), profile).order;
}

}  // namespace tgorder
