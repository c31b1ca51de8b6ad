#include "tgorder/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tgorder/error.hpp"

namespace tgorder {

using nlohmann::json;

namespace {

json parse_json(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
}

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
    throw ParseError(path + ": " + what);
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) field_error(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) field_error(path + "." + key, "missing required field");
    return *it;
}

double as_number(const json& value, const std::string& path) {
    if (!value.is_number()) field_error(path, "expected a number");
    return value.get<double>();
}

std::uint64_t as_count(const json& value, const std::string& path) {
    if (value.is_number_unsigned()) return value.get<std::uint64_t>();
    if (value.is_number_integer() && value.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(value.get<std::int64_t>());
    }
    if (value.is_number_float()) {
        const double d = value.get<double>();
        if (d >= 0.0 && std::floor(d) == d && d < 1.8e19) return static_cast<std::uint64_t>(d);
    }
    field_error(path, "expected a non-negative integer");
}

std::string as_string(const json& value, const std::string& path) {
    if (!value.is_string()) field_error(path, "expected a string");
    return value.get<std::string>();
}

bool as_bool(const json& value, const std::string& path) {
    if (!value.is_boolean()) field_error(path, "expected true or false");
    return value.get<bool>();
}

// Times are decimal strings; plain numbers are tolerated on input.
double as_time(const json& value, const std::string& path) {
    if (value.is_number()) return value.get<double>();
    if (!value.is_string()) field_error(path, "expected a time in ms");
    try {
        return parse_ms(value.get<std::string>());
    } catch (const ParseError& e) {
        field_error(path, e.what());
    }
}

std::optional<double> optional_number(const json& obj, const std::string& key,
                                      const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    return as_number(*it, path + "." + key);
}

std::vector<std::string> as_string_list(const json& value, const std::string& path) {
    if (!value.is_array()) field_error(path, "expected an array");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < value.size(); ++i) {
        out.push_back(as_string(value[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

void expect_kind(const json& doc, std::string_view kind) {
    const std::string got = as_string(require(doc, "kind", "$"), "$.kind");
    if (got != kind) field_error("$.kind", "expected \"" + std::string(kind) + "\", got \"" + got + "\"");
}

json permutation_json(const PermutationReport& report) {
    json entries = json::array();
    for (const PermutationEntry& e : report.entries) {
        entries.push_back({{"order", e.order}, {"makespan_ms", format_ms(e.makespan_ms)}});
    }
    return {
        {"kind", "permutations"},
        {"evaluated", report.entries.size()},
        {"total_orderings", report.total_orderings},
        {"sampled", report.sampled},
        {"best_index", report.best_index},
        {"best_ms", format_ms(report.best_ms)},
        {"median_ms", format_ms(report.median_ms)},
        {"worst_ms", format_ms(report.worst_ms)},
        {"geomean_ms", format_ms(report.geomean_ms)},
        {"entries", entries},
    };
}

PermutationReport permutation_from_json(const json& doc, const std::string& path) {
    PermutationReport report;
    const json& entries = require(doc, "entries", path);
    if (!entries.is_array() || entries.empty()) field_error(path + ".entries", "expected a non-empty array");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string p = path + ".entries[" + std::to_string(i) + "]";
        PermutationEntry e;
        e.order = as_string_list(require(entries[i], "order", p), p + ".order");
        e.makespan_ms = as_time(require(entries[i], "makespan_ms", p), p + ".makespan_ms");
        report.entries.push_back(std::move(e));
    }
    report.total_orderings = as_count(require(doc, "total_orderings", path), path + ".total_orderings");
    report.sampled = as_bool(require(doc, "sampled", path), path + ".sampled");
    // Summary statistics are derived data; recompute them from the entries.
    summarize(report);
    return report;
}

}  // namespace

std::string format_ms(double ms) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", ms);
    // Avoid "-0.000".
    if (std::string_view(buf) == "-0.000") return "0.000";
    return buf;
}

double parse_ms(std::string_view text) {
    const std::string s(text);
    char* end = nullptr;
    const double value = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(value)) {
        throw ParseError("'" + s + "' is not a decimal time in ms");
    }
    return value;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

DeviceProfile parse_profile(std::string_view text) {
    const json doc = parse_json(text);
    const std::string p = "$";
    const double engines = as_number(require(doc, "dma_engines", p), "$.dma_engines");
    if (engines != 1.0 && engines != 2.0) field_error("$.dma_engines", "must be 1 or 2");
    const double sigma = doc.contains("overlap_sigma")
                             ? as_number(doc["overlap_sigma"], "$.overlap_sigma")
                             : 1.0;
    TransferParams htd{as_number(require(doc, "htd_latency_ms", p), "$.htd_latency_ms"),
                       as_number(require(doc, "htd_bandwidth_mb_per_ms", p),
                                 "$.htd_bandwidth_mb_per_ms") *
                           kBytesPerMB};
    TransferParams dth{as_number(require(doc, "dth_latency_ms", p), "$.dth_latency_ms"),
                       as_number(require(doc, "dth_bandwidth_mb_per_ms", p),
                                 "$.dth_bandwidth_mb_per_ms") *
                           kBytesPerMB};
    const std::string name = doc.contains("name") ? as_string(doc["name"], "$.name") : "profile";
    try {
        return DeviceProfile(name, static_cast<int>(engines), htd, dth, sigma);
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("profile: ") + e.what());
    }
}

std::string emit_profile(const DeviceProfile& profile) {
    const json doc = {
        {"name", profile.name()},
        {"dma_engines", profile.dma_engines()},
        {"htd_latency_ms", profile.htd().latency_ms},
        {"htd_bandwidth_mb_per_ms", profile.htd().bandwidth_bytes_per_ms / kBytesPerMB},
        {"dth_latency_ms", profile.dth().latency_ms},
        {"dth_bandwidth_mb_per_ms", profile.dth().bandwidth_bytes_per_ms / kBytesPerMB},
        {"overlap_sigma", profile.overlap_sigma()},
    };
    return doc.dump(2) + "\n";
}

DeviceProfile load_profile(const std::string& path_or_name) {
    if (path_or_name == "default-1dma") return default_one_dma_profile();
    if (path_or_name == "default-2dma") return default_two_dma_profile();
    try {
        return parse_profile(read_text_file(path_or_name));
    } catch (const ParseError& e) {
        throw ParseError(path_or_name + ": " + e.what());
    }
}

TaskSet parse_taskset(std::string_view text) {
    const json doc = parse_json(text);
    TaskSet set;
    const json* records = &doc;
    std::string base = "$";
    if (doc.is_object()) {
        if (doc.contains("name")) set.name = as_string(doc["name"], "$.name");
        records = &require(doc, "tasks", "$");
        base = "$.tasks";
    }
    if (!records->is_array()) field_error(base, "expected an array of task records");

    std::set<std::string> ids;
    for (std::size_t i = 0; i < records->size(); ++i) {
        const json& r = (*records)[i];
        const std::string p = base + "[" + std::to_string(i) + "]";
        if (!r.is_object()) field_error(p, "expected an object");
        TaskSpec task;
        task.id = as_string(require(r, "id", p), p + ".id");
        if (!ids.insert(task.id).second) field_error(p + ".id", "duplicate task id '" + task.id + "'");

        task.htd_ms = optional_number(r, "htd_ms", p);
        task.k_ms = optional_number(r, "k_ms", p);
        task.dth_ms = optional_number(r, "dth_ms", p);
        if (r.contains("htd_bytes")) task.htd_bytes = as_count(r["htd_bytes"], p + ".htd_bytes");
        if (r.contains("dth_bytes")) task.dth_bytes = as_count(r["dth_bytes"], p + ".dth_bytes");
        const bool has_model = r.contains("work") || r.contains("eta") || r.contains("gamma");
        if (has_model) {
            task.kernel = KernelModel{as_number(require(r, "work", p), p + ".work"),
                                      as_number(require(r, "eta", p), p + ".eta"),
                                      as_number(require(r, "gamma", p), p + ".gamma")};
        }
        if (!task.k_ms && !task.kernel) {
            field_error(p, "needs k_ms or a kernel model (work, eta, gamma)");
        }
        try {
            validate(task);
        } catch (const InvalidArgument& e) {
            field_error(p, e.what());
        }
        set.tasks.push_back(std::move(task));
    }
    return set;
}

std::string emit_taskset(const TaskSet& taskset) {
    json tasks = json::array();
    for (const TaskSpec& t : taskset.tasks) {
        json r = {{"id", t.id}};
        if (t.htd_ms) r["htd_ms"] = *t.htd_ms;
        else if (t.htd_bytes) r["htd_bytes"] = t.htd_bytes;
        if (t.k_ms) {
            r["k_ms"] = *t.k_ms;
        }
        if (t.kernel) {
            r["work"] = t.kernel->work;
            r["eta"] = t.kernel->eta;
            r["gamma"] = t.kernel->gamma;
        }
        if (t.dth_ms) r["dth_ms"] = *t.dth_ms;
        else if (t.dth_bytes) r["dth_bytes"] = t.dth_bytes;
        tasks.push_back(std::move(r));
    }
    json doc = {{"tasks", tasks}};
    if (!taskset.name.empty()) doc["name"] = taskset.name;
    return doc.dump(2) + "\n";
}

TaskSet load_taskset(const std::filesystem::path& path) {
    try {
        return parse_taskset(read_text_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string emit_timeline_report(const Timeline& timeline) {
    json commands = json::array();
    for (const Command& c : timeline.commands) {
        commands.push_back({
            {"task", c.task_id},
            {"kind", std::string(to_string(c.kind))},
            {"group", c.group},
            {"nominal_ms", format_ms(c.nominal_ms)},
            {"start_ms", format_ms(c.start_ms)},
            {"end_ms", format_ms(c.end_ms)},
        });
    }
    const json doc = {
        {"kind", "timeline"},
        {"makespan_ms", format_ms(timeline.makespan_ms)},
        {"idle_ms",
         {{"HtD", format_ms(timeline.idle(CommandKind::HtD))},
          {"K", format_ms(timeline.idle(CommandKind::K))},
          {"DtH", format_ms(timeline.idle(CommandKind::DtH))}}},
        {"commands", commands},
    };
    return doc.dump(2) + "\n";
}

Timeline parse_timeline_report(std::string_view text) {
    const json doc = parse_json(text);
    expect_kind(doc, "timeline");
    const json& list = require(doc, "commands", "$");
    if (!list.is_array()) field_error("$.commands", "expected an array");
    std::vector<Command> commands;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string p = "$.commands[" + std::to_string(i) + "]";
        const json& r = list[i];
        Command c;
        c.task_id = as_string(require(r, "task", p), p + ".task");
        try {
            c.kind = command_kind_from_string(as_string(require(r, "kind", p), p + ".kind"));
        } catch (const ParseError& e) {
            field_error(p + ".kind", e.what());
        }
        c.group = static_cast<int>(as_count(require(r, "group", p), p + ".group"));
        c.nominal_ms = as_time(require(r, "nominal_ms", p), p + ".nominal_ms");
        c.start_ms = as_time(require(r, "start_ms", p), p + ".start_ms");
        c.end_ms = as_time(require(r, "end_ms", p), p + ".end_ms");
        if (c.end_ms < c.start_ms) field_error(p, "end_ms precedes start_ms");
        commands.push_back(std::move(c));
    }
    return finalize_timeline(std::move(commands));
}

std::string emit_permutation_report(const PermutationReport& report) {
    return permutation_json(report).dump(2) + "\n";
}

PermutationReport parse_permutation_report(std::string_view text) {
    const json doc = parse_json(text);
    expect_kind(doc, "permutations");
    return permutation_from_json(doc, "$");
}

std::string emit_scenario_report(const ScenarioResult& result) {
    json doc = {
        {"kind", "scenario"},
        {"workers", result.workers},
        {"batch_depth", result.batch_depth},
        {"benchmark", result.benchmark},
        {"profile", result.profile},
        {"seed", result.seed},
        {"worker_tasks", result.worker_tasks},
        {"batches", result.batches},
        {"heuristic_makespan_ms", format_ms(result.heuristic_makespan_ms)},
    };
    if (result.speedups) {
        doc["speedups"] = {{"heuristic", result.speedups->heuristic},
                           {"median", result.speedups->median},
                           {"best", result.speedups->best}};
    }
    if (result.noreorder) doc["noreorder"] = permutation_json(*result.noreorder);
    return doc.dump(2) + "\n";
}

ScenarioResult parse_scenario_report(std::string_view text) {
    const json doc = parse_json(text);
    expect_kind(doc, "scenario");
    ScenarioResult r;
    r.workers = static_cast<int>(as_count(require(doc, "workers", "$"), "$.workers"));
    r.batch_depth = static_cast<int>(as_count(require(doc, "batch_depth", "$"), "$.batch_depth"));
    r.benchmark = as_string(require(doc, "benchmark", "$"), "$.benchmark");
    r.profile = as_string(require(doc, "profile", "$"), "$.profile");
    r.seed = as_count(require(doc, "seed", "$"), "$.seed");
    const json& workers = require(doc, "worker_tasks", "$");
    if (!workers.is_array()) field_error("$.worker_tasks", "expected an array");
    for (std::size_t i = 0; i < workers.size(); ++i) {
        r.worker_tasks.push_back(as_string_list(workers[i], "$.worker_tasks[" + std::to_string(i) + "]"));
    }
    const json& batches = require(doc, "batches", "$");
    if (!batches.is_array()) field_error("$.batches", "expected an array");
    for (std::size_t i = 0; i < batches.size(); ++i) {
        r.batches.push_back(as_string_list(batches[i], "$.batches[" + std::to_string(i) + "]"));
    }
    r.heuristic_makespan_ms = as_time(require(doc, "heuristic_makespan_ms", "$"), "$.heuristic_makespan_ms");
    if (doc.contains("speedups")) {
        const json& s = doc["speedups"];
        r.speedups = Speedups{as_number(require(s, "heuristic", "$.speedups"), "$.speedups.heuristic"),
                              as_number(require(s, "median", "$.speedups"), "$.speedups.median"),
                              as_number(require(s, "best", "$.speedups"), "$.speedups.best")};
    }
    if (doc.contains("noreorder")) r.noreorder = permutation_from_json(doc["noreorder"], "$.noreorder");
    return r;
}

ScenarioConfig parse_scenario_config(std::string_view text, const std::filesystem::path& base_dir) {
    const json doc = parse_json(text);
    ScenarioConfig config;
    Scenario& s = config.scenario;
    s.workers = static_cast<int>(as_count(require(doc, "workers", "$"), "$.workers"));
    s.batch_depth = static_cast<int>(as_count(require(doc, "batch_depth", "$"), "$.batch_depth"));
    if (s.workers < 1) field_error("$.workers", "must be at least 1");
    if (s.batch_depth < 1) field_error("$.batch_depth", "must be at least 1");
    s.seed = as_count(require(doc, "seed", "$"), "$.seed");
    if (doc.contains("cap")) {
        config.cap = static_cast<std::size_t>(as_count(doc["cap"], "$.cap"));
        if (config.cap == 0) field_error("$.cap", "must be at least 1");
    }

    const std::string profile = as_string(require(doc, "profile", "$"), "$.profile");
    const bool builtin = profile == "default-1dma" || profile == "default-2dma";
    s.profile = load_profile(builtin ? profile : (base_dir / profile).string());

    if (doc.contains("benchmark")) {
        const std::string name = as_string(doc["benchmark"], "$.benchmark");
        try {
            s.pool = load_bk_benchmark(name);
        } catch (const UnknownBenchmark& e) {
            field_error("$.benchmark", e.what());
        }
    } else if (doc.contains("tasks")) {
        const std::filesystem::path path = base_dir / as_string(doc["tasks"], "$.tasks");
        TaskSet set = load_taskset(path);
        if (set.tasks.empty()) field_error("$.tasks", "task set is empty");
        s.pool.name = set.name.empty() ? path.stem().string() : set.name;
        s.pool.tasks = std::move(set.tasks);
        s.pool.dk_fraction = dk_fraction(s.pool.tasks, s.profile);
    } else {
        field_error("$", "needs either \"benchmark\" or \"tasks\"");
    }
    return config;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
    try {
        return parse_scenario_config(read_text_file(path), path.parent_path());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace tgorder
