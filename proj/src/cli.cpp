#include "tgorder/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "tgorder/engine.hpp"
#include "tgorder/error.hpp"
#include "tgorder/heuristic.hpp"
#include "tgorder/io.hpp"
#include "tgorder/oracle.hpp"
#include "tgorder/workload.hpp"

namespace tgorder {

namespace {

class UsageError : public Error {
public:
    using Error::Error;
};

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<TaskSpec> load_tasks_nonempty(const std::string& path) {
    TaskSet set = load_taskset(path);
    if (set.tasks.empty()) throw UsageError("task set '" + path + "' is empty");
    return std::move(set.tasks);
}

// Reorders `tasks` by an explicit id list, which must be a permutation.
std::vector<TaskSpec> apply_order(const std::vector<TaskSpec>& tasks,
                                  const std::vector<std::string>& ids) {
    std::map<std::string, const TaskSpec*> by_id;
    for (const TaskSpec& t : tasks) by_id[t.id] = &t;
    std::set<std::string> seen;
    std::vector<TaskSpec> ordered;
    for (const std::string& id : ids) {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw UnknownTaskId("--order: unknown task id '" + id + "'");
        if (!seen.insert(id).second) throw UnknownTaskId("--order: task id '" + id + "' repeated");
        ordered.push_back(*it->second);
    }
    if (ordered.size() != tasks.size()) {
        throw UnknownTaskId("--order must list every task exactly once (" +
                            std::to_string(tasks.size()) + " ids expected)");
    }
    return ordered;
}

std::vector<TaskSpec> permuted(const std::vector<TaskSpec>& tasks, const Ordering& order) {
    std::vector<TaskSpec> out;
    out.reserve(order.size());
    for (std::size_t idx : order) out.push_back(tasks[idx]);
    return out;
}

struct Options {
    std::string tasks;
    std::string profile = "default-2dma";
    std::string order;
    std::string out;
    std::string trace;
    std::string table;
    std::string config;
    std::string benchmarks = "all";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> cap;
    double dt = kDefaultOracleStepMs;
    bool skip_noreorder = false;
};

int cmd_simulate(const Options& o, std::ostream& out) {
    std::vector<TaskSpec> tasks = load_tasks_nonempty(o.tasks);
    const DeviceProfile profile = load_profile(o.profile);
    if (!o.order.empty()) tasks = apply_order(tasks, split_list(o.order));

    const Timeline timeline = simulate(tasks, profile);
    if (!o.out.empty()) write_text_file(o.out, emit_timeline_report(timeline));
    if (!o.trace.empty()) write_text_file(o.trace, export_trace(timeline));
    if (!o.table.empty()) write_text_file(o.table, export_table(timeline));
    out << "makespan " << format_ms(timeline.makespan_ms) << " ms\n";
    return kExitOk;
}

int cmd_schedule(const Options& o, std::ostream& out) {
    const std::vector<TaskSpec> tasks = load_tasks_nonempty(o.tasks);
    const DeviceProfile profile = load_profile(o.profile);

    const Ordering order = reorder_batch(tasks, profile);
    const std::vector<TaskSpec> ordered = permuted(tasks, order);
    const Timeline timeline = simulate(ordered, profile);
    if (!o.out.empty()) write_text_file(o.out, emit_timeline_report(timeline));
    if (!o.trace.empty()) write_text_file(o.trace, export_trace(timeline));

    out << "order";
    for (const TaskSpec& t : ordered) out << ' ' << t.id;
    out << "\npredicted makespan " << format_ms(timeline.makespan_ms) << " ms\n";
    return kExitOk;
}

int cmd_permute(const Options& o, std::ostream& out, std::ostream& err) {
    const std::vector<TaskSpec> tasks = load_tasks_nonempty(o.tasks);
    const DeviceProfile profile = load_profile(o.profile);

    const PermutationReport report = exhaustive_search(tasks, profile, o.cap.value_or(kDefaultPermutationCap),
                                                       o.seed.value_or(kDefaultSeed));
    if (report.sampled) {
        err << "warning: " << report.total_orderings << " orderings exceed the cap; evaluated a random sample of "
            << report.entries.size() << "\n";
    }
    if (!o.out.empty()) write_text_file(o.out, emit_permutation_report(report));

    const Ordering order = reorder_batch(tasks, profile);
    const double heuristic = simulate(permuted(tasks, order), profile).makespan_ms;
    out << "evaluated " << report.entries.size() << " of " << report.total_orderings << " orderings\n";
    out << "best " << format_ms(report.best_ms) << " ms\n";
    out << "median " << format_ms(report.median_ms) << " ms\n";
    out << "worst " << format_ms(report.worst_ms) << " ms\n";
    out << "heuristic " << format_ms(heuristic) << " ms, percentile "
        << fixed(report.percentile_of(heuristic), 1) << "\n";
    return kExitOk;
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream& err) {
    ScenarioConfig config = load_scenario_config(o.config);
    if (o.seed) config.scenario.seed = *o.seed;
    if (o.cap) config.cap = *o.cap;

    const ScenarioRun run = run_scenario(config.scenario, !o.skip_noreorder, config.cap);
    const ScenarioResult& r = run.result;
    if (r.noreorder && r.noreorder->sampled) {
        err << "warning: " << r.noreorder->total_orderings
            << " NoReorder orderings exceed the cap; the distribution is a random sample of "
            << r.noreorder->entries.size() << "\n";
    }
    if (!o.out.empty()) write_text_file(o.out, emit_scenario_report(r));
    if (!o.trace.empty()) write_text_file(o.trace, export_trace(run.timeline));

    out << "scenario " << r.benchmark << " T=" << r.workers << " N=" << r.batch_depth << " on "
        << r.profile << " (seed " << r.seed << ")\n";
    out << "heuristic makespan " << format_ms(r.heuristic_makespan_ms) << " ms\n";
    if (r.speedups) {
        out << "speedup vs worst ordering: heuristic " << fixed(r.speedups->heuristic, 4) << "  median "
            << fixed(r.speedups->median, 4) << "  best " << fixed(r.speedups->best, 4) << "\n";
    }
    out << "Avg. CPU Scheduling Time (ms): " << fixed(run.overhead.per_batch_ms, 4) << " over "
        << run.overhead.batches << " task group(s)\n";
    out << "Avg. Device Execution Time (ms): "
        << fixed(r.heuristic_makespan_ms / static_cast<double>(run.overhead.batches), 2) << "\n";
    return kExitOk;
}

int cmd_validate(const Options& o, std::ostream& out) {
    if (!(o.dt > 0.0)) throw UsageError("--dt must be positive");
    std::vector<std::string> names = split_list(o.benchmarks);
    if (names.empty()) throw UsageError("--benchmarks selector is empty");
    if (names.size() == 1 && names.front() == "all") names = bk_benchmark_names();

    const double tolerance_ms = 2.0 * o.dt;
    bool ok = true;
    double worst_rel = 0.0;
    for (const DeviceProfile& profile : {default_one_dma_profile(), default_two_dma_profile()}) {
        for (const std::string& name : names) {
            const Benchmark bk = load_bk_benchmark(name);
            const CrossCheck check = cross_check(bk.tasks, profile, o.dt);
            const bool pass = check.max_abs_deviation_ms <= tolerance_ms * (1.0 + 1e-9);
            ok = ok && pass;
            worst_rel = std::max(worst_rel, check.max_rel_deviation);
            out << (pass ? "PASS " : "FAIL ") << name << " on " << profile.name() << ": "
                << check.orderings << " orderings, max deviation " << fixed(check.max_abs_deviation_ms, 6)
                << " ms (" << fixed(100.0 * check.max_rel_deviation, 4) << "%)\n";
        }
    }
    out << "max relative deviation " << fixed(100.0 * worst_rel, 4) << "% (tolerance "
        << format_ms(tolerance_ms) << " ms)\n";
    return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Predict and optimize the makespan of offloaded task groups", "tgorder"};
    app.require_subcommand(1);
    Options o;

    auto add_profile = [&](CLI::App* cmd) {
        cmd->add_option("--profile", o.profile, "Device profile JSON, or default-1dma / default-2dma")
            ->capture_default_str();
    };
    auto add_tasks = [&](CLI::App* cmd) {
        cmd->add_option("--tasks", o.tasks, "Task set JSON")->required();
    };

    CLI::App* simulate_cmd = app.add_subcommand("simulate", "Simulate one submission order");
    add_tasks(simulate_cmd);
    add_profile(simulate_cmd);
    simulate_cmd->add_option("--order", o.order, "Comma-separated task ids (default: file order)");
    simulate_cmd->add_option("--out", o.out, "Write the timeline report here");
    simulate_cmd->add_option("--trace", o.trace, "Write a Chrome trace-event file here");
    simulate_cmd->add_option("--table", o.table, "Write task_id,kind,start_ms,end_ms rows here");

    CLI::App* schedule_cmd = app.add_subcommand("schedule", "Compute a submission order with the reordering heuristic");
    add_tasks(schedule_cmd);
    add_profile(schedule_cmd);
    schedule_cmd->add_option("--out", o.out, "Write the timeline of the chosen order here");
    schedule_cmd->add_option("--trace", o.trace, "Write a Chrome trace-event file here");

    CLI::App* permute_cmd = app.add_subcommand("permute", "Simulate every (or a sample of) ordering");
    add_tasks(permute_cmd);
    add_profile(permute_cmd);
    permute_cmd->add_option("--cap", o.cap, "Maximum orderings to evaluate")->check(CLI::PositiveNumber);
    permute_cmd->add_option("--seed", o.seed, "Sampling seed");
    permute_cmd->add_option("--out", o.out, "Write the permutation report here");

    CLI::App* bench_cmd = app.add_subcommand("bench", "Run a multi-worker scenario");
    bench_cmd->add_option("--config", o.config, "Scenario config JSON")->required();
    bench_cmd->add_option("--seed", o.seed, "Override the config seed");
    bench_cmd->add_option("--cap", o.cap, "Override the NoReorder ordering cap")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--out", o.out, "Write the scenario report here");
    bench_cmd->add_option("--trace", o.trace, "Write a Chrome trace of the heuristic run here");
    bench_cmd->add_flag("--skip-noreorder", o.skip_noreorder, "Do not evaluate the NoReorder distribution");

    CLI::App* validate_cmd = app.add_subcommand("validate", "Cross-check the simulator against the fixed-step reference");
    validate_cmd->add_option("--dt", o.dt, "Reference step in ms")->capture_default_str();
    validate_cmd->add_option("--benchmarks", o.benchmarks, "Comma-separated BK names, or all")
        ->capture_default_str();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*simulate_cmd) return cmd_simulate(o, out);
        if (*schedule_cmd) return cmd_schedule(o, out);
        if (*permute_cmd) return cmd_permute(o, out, err);
        if (*bench_cmd) return cmd_bench(o, out, err);
        if (*validate_cmd) return cmd_validate(o, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const UnknownTaskId& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}

}  // namespace tgorder
