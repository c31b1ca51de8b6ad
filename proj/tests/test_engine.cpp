#include <catch_amalgamated.hpp>

#include <map>
#include <random>

#include "json.hpp"
#include "support.hpp"
#include "tgorder/error.hpp"

using namespace tgorder;
using namespace tgtest;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

void check_interval(const Timeline& t, const std::string& id, CommandKind kind, double start, double end) {
    INFO(id << " " << to_string(kind));
    const Command* c = t.find(id, kind);
    REQUIRE(c != nullptr);
    CHECK_THAT(c->start_ms, WithinAbs(start, 1e-9));
    CHECK_THAT(c->end_ms, WithinAbs(end, 1e-9));
}

std::vector<TaskSpec> random_tasks(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.1, 10.0);
    std::bernoulli_distribution null_stage(0.2);
    std::vector<TaskSpec> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double htd = null_stage(rng) ? 0.0 : u(rng);
        const double dth = null_stage(rng) ? 0.0 : u(rng);
        out.push_back(TaskSpec::from_times("r" + std::to_string(i), htd, u(rng), dth));
    }
    return out;
}

}  // namespace

TEST_CASE("single task runs as a plain chain", "[engine]") {
    const std::vector<TaskSpec> tasks{table2("T0")};
    for (const DeviceProfile& p : {default_two_dma_profile(), default_one_dma_profile()}) {
        const Timeline t = simulate(tasks, p);
        CHECK_THAT(t.makespan_ms, WithinAbs(10.0, 1e-12));
        check_interval(t, "T0", CommandKind::HtD, 0, 1);
        check_interval(t, "T0", CommandKind::K, 1, 9);
        check_interval(t, "T0", CommandKind::DtH, 9, 10);
    }
}

TEST_CASE("two copies of T0 serialize on the kernel queue", "[engine]") {
    TaskSpec a = table2("T0"), b = table2("T0");
    a.id = "a";
    b.id = "b";
    const std::vector<TaskSpec> tasks{a, b};
    const Timeline t = simulate(tasks, two_dma(1.0));
    CHECK_THAT(t.makespan_ms, WithinAbs(18.0, 1e-12));
    check_interval(t, "a", CommandKind::HtD, 0, 1);
    check_interval(t, "b", CommandKind::HtD, 1, 2);
    check_interval(t, "a", CommandKind::K, 1, 9);
    check_interval(t, "b", CommandKind::K, 9, 17);
    check_interval(t, "a", CommandKind::DtH, 9, 10);
    check_interval(t, "b", CommandKind::DtH, 17, 18);
}

TEST_CASE("overlap re-estimation moves an HtD end from 210 to 215", "[engine]") {
    // HtD0 [0,200], K0 [200,207]; DtH0 starts at 207 while HtD1 has 3 ms left.
    const std::vector<TaskSpec> tasks{TaskSpec::from_times("t0", 200, 7, 20),
                                      TaskSpec::from_times("t1", 10, 5, 5)};
    const Timeline t = simulate(tasks, two_dma(0.375));
    check_interval(t, "t1", CommandKind::HtD, 200, 215);
    // DtH0 ran 8 ms at rate 0.375 (3 ms of work), then 17 ms alone.
    check_interval(t, "t0", CommandKind::DtH, 207, 232);
}

TEST_CASE("recompute_overlap closed forms", "[engine]") {
    const ActiveTransfer htd{10.0, 0.3};
    const ActiveTransfer dth{20.0, 1.0};
    const OverlapEnds slow = recompute_overlap(htd, dth, 207.0, two_dma(0.375));
    CHECK_THAT(slow.htd_end_ms, WithinRel(215.0, 1e-12));
    CHECK_THAT(slow.dth_end_ms, WithinRel(207.0 + 20.0 / 0.375, 1e-12));

    const OverlapEnds free = recompute_overlap(htd, dth, 207.0, two_dma(1.0));
    CHECK_THAT(free.htd_end_ms, WithinRel(210.0, 1e-12));
    CHECK_THAT(free.dth_end_ms, WithinRel(227.0, 1e-12));

    const OverlapEnds equal = recompute_overlap({10.0, 1.0}, {10.0, 1.0}, 0.0, two_dma(0.5));
    CHECK_THAT(equal.htd_end_ms, WithinRel(20.0, 1e-12));
    CHECK_THAT(equal.dth_end_ms, WithinRel(20.0, 1e-12));
}

TEST_CASE("fully overlapped equal transfers take twice as long at sigma 0.5", "[engine]") {
    const std::vector<TaskSpec> tasks{TaskSpec::from_times("out", 0, 0, 10),
                                      TaskSpec::from_times("in", 10, 1, 0)};
    const Timeline t = simulate(tasks, two_dma(0.5));
    check_interval(t, "out", CommandKind::DtH, 0, 20);
    check_interval(t, "in", CommandKind::HtD, 0, 20);
    CHECK(t.find("out", CommandKind::HtD) == nullptr);
    CHECK(t.find("in", CommandKind::DtH) == nullptr);
}

TEST_CASE("one-engine device runs every HtD before any DtH", "[engine]") {
    const std::vector<TaskSpec> tasks = pick({"T0", "T7"});
    const Timeline t = simulate(tasks, one_dma());
    // HtD T0 [0,1], HtD T7 [1,9]; K T0 [1,9]; DtH T0 waits for HtD T7.
    check_interval(t, "T7", CommandKind::HtD, 1, 9);
    check_interval(t, "T0", CommandKind::DtH, 9, 10);
    check_interval(t, "T7", CommandKind::K, 9, 10);
    check_interval(t, "T7", CommandKind::DtH, 10, 11);
}

TEST_CASE("engine rejects unusable input", "[engine]") {
    CHECK_THROWS_AS(simulate(std::vector<TaskSpec>{}, default_two_dma_profile()), InvalidArgument);
    TaskSpec bare;
    bare.id = "bare";
    bare.htd_bytes = 100;
    CHECK_THROWS_AS(simulate(std::vector<TaskSpec>{bare}, default_two_dma_profile()), UnresolvableDuration);
}

TEST_CASE("timeline invariants on random task groups", "[engine][property]") {
    std::mt19937_64 rng(2024);
    const std::vector<DeviceProfile> profiles{one_dma(), two_dma(1.0), two_dma(0.5),
                                              default_one_dma_profile(), default_two_dma_profile()};
    for (int trial = 0; trial < 300; ++trial) {
        const std::vector<TaskSpec> tasks = random_tasks(rng, 1 + trial % 7);
        for (const DeviceProfile& p : profiles) {
            const Timeline t = simulate(tasks, p);
            INFO("trial " << trial << " profile " << p.name() << " sigma " << p.overlap_sigma());
            std::map<std::string, StageTimes> stages;
            double serial = 0.0, longest_chain = 0.0;
            for (const TaskSpec& task : tasks) {
                stages[task.id] = resolve_stages(task, p);
                serial += stages[task.id].total_ms();
                longest_chain = std::max(longest_chain, stages[task.id].total_ms());
            }

            // FIFO: per kind, ends follow task order.
            for (CommandKind kind : {CommandKind::HtD, CommandKind::K, CommandKind::DtH}) {
                double prev_end = 0.0;
                for (const TaskSpec& task : tasks) {
                    const Command* c = t.find(task.id, kind);
                    if (c == nullptr) continue;
                    CHECK(c->end_ms >= prev_end - 1e-9);
                    CHECK(c->end_ms >= c->start_ms);
                    prev_end = c->end_ms;
                }
            }

            // Null stages produce no command.
            for (const TaskSpec& task : tasks) {
                CHECK((t.find(task.id, CommandKind::HtD) != nullptr) == (stages[task.id].htd_ms > 0));
                CHECK((t.find(task.id, CommandKind::DtH) != nullptr) == (stages[task.id].dth_ms > 0));
                REQUIRE(t.find(task.id, CommandKind::K) != nullptr);
            }

            // Dependencies within a task.
            for (const TaskSpec& task : tasks) {
                const Command* h = t.find(task.id, CommandKind::HtD);
                const Command* k = t.find(task.id, CommandKind::K);
                const Command* d = t.find(task.id, CommandKind::DtH);
                if (h) CHECK(k->start_ms >= h->end_ms - 1e-9);
                if (d) CHECK(d->start_ms >= k->end_ms - 1e-9);
            }

            const auto kernels = of_kind(t, CommandKind::K);
            for (std::size_t i = 0; i < kernels.size(); ++i) {
                for (std::size_t j = i + 1; j < kernels.size(); ++j) CHECK_FALSE(overlaps(*kernels[i], *kernels[j]));
            }

            if (p.dma_engines() == 1) {
                std::vector<const Command*> transfers = of_kind(t, CommandKind::HtD);
                const auto dths = of_kind(t, CommandKind::DtH);
                double max_htd_end = 0.0;
                for (const Command* c : transfers) max_htd_end = std::max(max_htd_end, c->end_ms);
                for (const Command* c : dths) CHECK(c->start_ms >= max_htd_end - 1e-9);
                transfers.insert(transfers.end(), dths.begin(), dths.end());
                for (std::size_t i = 0; i < transfers.size(); ++i) {
                    for (std::size_t j = i + 1; j < transfers.size(); ++j) {
                        CHECK_FALSE(overlaps(*transfers[i], *transfers[j]));
                    }
                }
            }

            if (p.dma_engines() == 1 || p.overlap_sigma() == 1.0) {
                for (const Command& c : t.commands) CHECK_THAT(c.duration_ms(), WithinAbs(c.nominal_ms, 1e-9));
            }

            CHECK(t.makespan_ms >= longest_chain - 1e-9);
            CHECK(t.makespan_ms <= serial + 1e-9);
            CHECK(simulate(tasks, p) == t);
        }
    }
}

TEST_CASE("trace export", "[engine]") {
    const auto events_of = [](const Timeline& t) {
        return nlohmann::json::parse(export_trace(t))["traceEvents"];
    };

    const auto single = events_of(simulate(std::vector<TaskSpec>{table2("T0")}, default_two_dma_profile()));
    REQUIRE(single.size() == 3);
    std::set<int> lanes;
    for (const auto& e : single) {
        CHECK(e["ph"] == "X");
        lanes.insert(e["tid"].get<int>());
    }
    CHECK(lanes.size() == 3);

    const auto no_dth =
        events_of(simulate(std::vector<TaskSpec>{TaskSpec::from_times("x", 1, 2, 0)}, default_two_dma_profile()));
    CHECK(no_dth.size() == 2);
    for (const auto& e : no_dth) CHECK(e["name"].get<std::string>().find("DtH") == std::string::npos);

    TaskSpec a = table2("T0"), b = table2("T0");
    a.id = "a";
    b.id = "b";
    const auto pair = events_of(simulate(std::vector<TaskSpec>{a, b}, two_dma(1.0)));
    CHECK(pair.size() == 6);
    std::int64_t max_end = 0;
    for (const auto& e : pair) max_end = std::max(max_end, e["ts"].get<std::int64_t>() + e["dur"].get<std::int64_t>());
    CHECK(max_end == 18000);
}

TEST_CASE("table export", "[engine]") {
    const Timeline t = simulate(std::vector<TaskSpec>{table2("T0")}, default_two_dma_profile());
    CHECK(export_table(t) ==
          "task_id,kind,start_ms,end_ms\n"
          "T0,HtD,0.000,1.000\n"
          "T0,K,1.000,9.000\n"
          "T0,DtH,9.000,10.000\n");
}
