#pragma once

// JSON file formats: device profiles, task sets, scenario configs and the
// three report kinds. Report times are decimal strings in milliseconds with
// three fractional digits (microsecond resolution).
//
// Every parse_* function throws ParseError with the offending field path
// (and line/column for syntax errors).

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tgorder/engine.hpp"
#include "tgorder/model.hpp"
#include "tgorder/oracle.hpp"
#include "tgorder/workload.hpp"

namespace tgorder {

// 1 MB in profile files.
inline constexpr double kBytesPerMB = 1.0e6;

std::string format_ms(double ms);
double parse_ms(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

// {name, dma_engines, htd_latency_ms, htd_bandwidth_mb_per_ms,
//  dth_latency_ms, dth_bandwidth_mb_per_ms, overlap_sigma}
DeviceProfile parse_profile(std::string_view text);
std::string emit_profile(const DeviceProfile& profile);
// Accepts a file path or one of the built-in names "default-1dma",
// "default-2dma".
DeviceProfile load_profile(const std::string& path_or_name);

// {"name": optional, "tasks": [{id, htd_ms | htd_bytes, k_ms | (work, eta,
// gamma), dth_ms | dth_bytes}, ...]}. A bare array of records is accepted
// too. Ids must be unique.
struct TaskSet {
    std::string name;
    std::vector<TaskSpec> tasks;
};

TaskSet parse_taskset(std::string_view text);
std::string emit_taskset(const TaskSet& taskset);
TaskSet load_taskset(const std::filesystem::path& path);

std::string emit_timeline_report(const Timeline& timeline);
Timeline parse_timeline_report(std::string_view text);

std::string emit_permutation_report(const PermutationReport& report);
PermutationReport parse_permutation_report(std::string_view text);

std::string emit_scenario_report(const ScenarioResult& result);
ScenarioResult parse_scenario_report(std::string_view text);

// {workers, batch_depth, seed, cap?, profile, benchmark | tasks}
// `profile` and `tasks` are paths relative to the config file (or built-in
// profile names); `benchmark` names one of the BK sets.
struct ScenarioConfig {
    Scenario scenario;
    std::size_t cap = kDefaultPermutationCap;
};

ScenarioConfig parse_scenario_config(std::string_view text,
                                     const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

}  // namespace tgorder
