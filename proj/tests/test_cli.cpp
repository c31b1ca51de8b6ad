#include <catch_amalgamated.hpp>

#include <filesystem>
#include <sstream>

#include "support.hpp"
#include "tgorder/cli.hpp"
#include "tgorder/io.hpp"

using namespace tgorder;
using Catch::Matchers::ContainsSubstring;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

const std::string kData = TGORDER_DATA_DIR;

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "tgorder_cli_test";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string write_tasks(const std::string& name, const std::string& json) {
    const auto path = scratch(name);
    write_text_file(path, json);
    return path.string();
}

}  // namespace

TEST_CASE("simulate", "[cli]") {
    const std::string t0 = write_tasks("t0.json", R"({"tasks": [{"id":"T0","htd_ms":1,"k_ms":8,"dth_ms":1}]})");
    const Run single = run({"simulate", "--tasks", t0});
    CHECK(single.code == kExitOk);
    CHECK(single.out == "makespan 10.000 ms\n");

    const auto report = scratch("bk0_timeline.json");
    const auto trace = scratch("bk0_trace.json");
    const Run bk0 = run({"simulate", "--tasks", kData + "/benchmarks/BK0.json", "--profile",
                         kData + "/profiles/default_2dma.json", "--out", report.string(), "--trace", trace.string()});
    REQUIRE(bk0.code == kExitOk);
    const Timeline expected = simulate(load_bk_benchmark("BK0").tasks, default_two_dma_profile());
    CHECK(bk0.out == "makespan " + format_ms(expected.makespan_ms) + " ms\n");
    CHECK(parse_timeline_report(read_text_file(report)).makespan_ms == expected.makespan_ms);
    CHECK(std::filesystem::file_size(trace) > 0);

    const Run ordered = run({"simulate", "--tasks", kData + "/benchmarks/BK0.json", "--order", "T7,T6,T5,T4"});
    REQUIRE(ordered.code == kExitOk);
    const Timeline reversed = simulate(tgtest::pick({"T7", "T6", "T5", "T4"}), default_two_dma_profile());
    CHECK(ordered.out == "makespan " + format_ms(reversed.makespan_ms) + " ms\n");

    const Run dup = run({"simulate", "--tasks", kData + "/benchmarks/BK0.json", "--order", "T6,T6,T4,T5"});
    CHECK(dup.code == kExitInvalidInput);
    CHECK_THAT(dup.err, ContainsSubstring("T6"));
    CHECK(run({"simulate", "--tasks", kData + "/benchmarks/BK0.json", "--order", "T6,T7"}).code == kExitInvalidInput);
    CHECK(run({"simulate", "--tasks", kData + "/benchmarks/BK0.json", "--order", "T6,T7,T4,T9"}).code ==
          kExitInvalidInput);
}

TEST_CASE("schedule", "[cli]") {
    const Run bk100 = run({"schedule", "--tasks", kData + "/benchmarks/BK100.json"});
    REQUIRE(bk100.code == kExitOk);
    CHECK_THAT(bk100.out, Catch::Matchers::StartsWith("order T0 "));
    CHECK_THAT(bk100.out, ContainsSubstring("predicted makespan "));

    const std::string one = write_tasks("one.json", R"({"tasks": [{"id":"solo","htd_ms":1,"k_ms":2,"dth_ms":1}]})");
    const Run single = run({"schedule", "--tasks", one});
    CHECK(single.code == kExitOk);
    CHECK_THAT(single.out, Catch::Matchers::StartsWith("order solo\n"));

    const std::string none = write_tasks("none.json", R"({"tasks": []})");
    CHECK(run({"schedule", "--tasks", none}).code == kExitUsage);
}

TEST_CASE("permute", "[cli]") {
    const auto report = scratch("bk50_perm.json");
    const Run bk50 = run({"permute", "--tasks", kData + "/benchmarks/BK50.json", "--out", report.string()});
    REQUIRE(bk50.code == kExitOk);
    CHECK_THAT(bk50.out, ContainsSubstring("evaluated 24 of 24 orderings"));
    CHECK(parse_permutation_report(read_text_file(report)).entries.size() == 24);

    const auto a = scratch("eight_a.json"), b = scratch("eight_b.json");
    const Run first = run({"permute", "--tasks", kData + "/benchmarks/table2.json", "--cap", "1000", "--seed", "5",
                           "--out", a.string()});
    const Run second = run({"permute", "--tasks", kData + "/benchmarks/table2.json", "--cap", "1000", "--seed", "5",
                            "--out", b.string()});
    REQUIRE(first.code == kExitOk);
    CHECK_THAT(first.out, ContainsSubstring("evaluated 1000 of 40320 orderings"));
    CHECK_THAT(first.err, ContainsSubstring("warning"));
    CHECK(read_text_file(a) == read_text_file(b));

    for (const std::string& name : bk_benchmark_names()) {
        const Run r = run({"permute", "--tasks", kData + "/benchmarks/" + name + ".json"});
        REQUIRE(r.code == kExitOk);
        const auto pos = r.out.find("percentile ");
        REQUIRE(pos != std::string::npos);
        INFO(name << ": " << r.out);
        CHECK(std::stod(r.out.substr(pos + 11)) <= 50.0);
    }
}

TEST_CASE("bench", "[cli]") {
    const Run bk25 = run({"bench", "--config", kData + "/scenarios/bk25_t4_n1.json"});
    REQUIRE(bk25.code == kExitOk);
    CHECK_THAT(bk25.out, ContainsSubstring("speedup vs worst ordering: heuristic "));
    CHECK_THAT(bk25.out, ContainsSubstring("Avg. CPU Scheduling Time (ms): "));

    const auto report = scratch("single_worker.json");
    const Run single = run({"bench", "--config", kData + "/scenarios/single_worker_t1_n4.json", "--out",
                            report.string()});
    REQUIRE(single.code == kExitOk);
    const ScenarioResult r = parse_scenario_report(read_text_file(report));
    CHECK(r.speedups->heuristic == 1.0);
    CHECK(r.speedups->median == 1.0);
    CHECK(r.speedups->best == 1.0);

    const Run big = run({"bench", "--config", kData + "/scenarios/bk50_t8_n2.json", "--cap", "200"});
    REQUIRE(big.code == kExitOk);
    const auto pos = big.out.find("Avg. CPU Scheduling Time (ms): ");
    REQUIRE(pos != std::string::npos);
    const std::string value = big.out.substr(pos + 31, big.out.find(' ', pos + 31) - pos - 31);
    const auto dot = value.find('.');
    REQUIRE(dot != std::string::npos);
    CHECK(value.size() - dot - 1 >= 2);

    CHECK(run({"bench"}).code == kExitUsage);
    CHECK(run({"bench", "--config", "/nonexistent.json"}).code == kExitParse);
}

TEST_CASE("validate", "[cli]") {
    const Run ok = run({"validate", "--benchmarks", "BK0,BK100"});
    CHECK(ok.code == kExitOk);
    CHECK_THAT(ok.out, ContainsSubstring("max relative deviation"));
    CHECK(run({"validate", "--dt", "5", "--benchmarks", "BK50"}).code == kExitCheckFailed);
    CHECK(run({"validate", "--benchmarks", ""}).code == kExitUsage);
    CHECK(run({"validate", "--dt", "0"}).code == kExitUsage);
    CHECK(run({"validate", "--benchmarks", "BK1"}).code == kExitInvalidInput);
}

TEST_CASE("usage and parse errors get distinct exit codes", "[cli]") {
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({"simulate"}).code == kExitUsage);
    CHECK(run({"--help"}).code == kExitOk);
    const std::string broken = write_tasks("broken.json", "{\"tasks\": [");
    CHECK(run({"simulate", "--tasks", broken}).code == kExitParse);
    const std::string bad_field = write_tasks("bad_field.json", R"({"tasks": [{"id": "a", "k_ms": "fast"}]})");
    const Run r = run({"simulate", "--tasks", bad_field});
    CHECK(r.code == kExitParse);
    CHECK_THAT(r.err, ContainsSubstring("$.tasks[0].k_ms"));
}
