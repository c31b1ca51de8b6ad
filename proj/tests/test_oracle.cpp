#include <catch_amalgamated.hpp>

#include <random>
#include <set>

#include "support.hpp"
#include "tgorder/error.hpp"
#include "tgorder/oracle.hpp"

using namespace tgorder;
using namespace tgtest;
using Catch::Matchers::WithinAbs;

TEST_CASE("micro-step reference on closed-form cases", "[oracle]") {
    const double dt = 0.001;
    const Timeline single = micro_simulate(std::vector<TaskSpec>{table2("T0")}, default_two_dma_profile(), dt);
    CHECK_THAT(single.makespan_ms, WithinAbs(10.0, dt));

    const std::vector<TaskSpec> crossing{TaskSpec::from_times("out", 0, 0, 10), TaskSpec::from_times("in", 10, 1, 0)};
    const Timeline t = micro_simulate(crossing, two_dma(0.5), dt);
    CHECK_THAT(t.find("out", CommandKind::DtH)->end_ms, WithinAbs(20.0, dt));
    CHECK_THAT(t.find("in", CommandKind::HtD)->end_ms, WithinAbs(20.0, dt));
    CHECK_THROWS_AS(micro_simulate(crossing, two_dma(0.5), 0.0), InvalidArgument);
}

TEST_CASE("micro-step starts and ends sit on the tick grid", "[oracle][property]") {
    const double dt = 0.25;
    const Timeline t = micro_simulate(pick({"T0", "T4", "T5", "T7"}), default_two_dma_profile(), dt);
    for (const Command& c : t.commands) {
        CHECK_THAT(c.start_ms / dt, WithinAbs(std::round(c.start_ms / dt), 1e-9));
        CHECK_THAT(c.end_ms / dt, WithinAbs(std::round(c.end_ms / dt), 1e-9));
    }
}

TEST_CASE("engine and micro-step reference agree on every benchmark ordering", "[oracle][property]") {
    const double dt = kDefaultOracleStepMs;
    for (const DeviceProfile& p : {default_one_dma_profile(), default_two_dma_profile(), two_dma(0.375)}) {
        for (const std::string& name : bk_benchmark_names()) {
            for (const auto& order : all_permutations(load_bk_benchmark(name).tasks)) {
                const double exact = simulate(order, p).makespan_ms;
                const double stepped = micro_simulate(order, p, dt).makespan_ms;
                INFO(name << " on " << p.name());
                CHECK_THAT(stepped, WithinAbs(exact, 2 * dt));
            }
        }
    }
}

TEST_CASE("engine and micro-step reference agree on random groups", "[oracle][property]") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.05, 4.0);
    std::bernoulli_distribution null_stage(0.2);
    const double dt = 0.001;
    for (int trial = 0; trial < 60; ++trial) {
        std::vector<TaskSpec> tasks;
        for (int i = 0; i < 2 + trial % 4; ++i) {
            tasks.push_back(TaskSpec::from_times("r" + std::to_string(i), null_stage(rng) ? 0.0 : u(rng), u(rng),
                                                 null_stage(rng) ? 0.0 : u(rng)));
        }
        for (const DeviceProfile& p : {one_dma(), two_dma(0.5), two_dma(0.8)}) {
            const double exact = simulate(tasks, p).makespan_ms;
            // Off-grid durations may lose up to one tick per command on the
            // critical path.
            const double band = 2 * dt * static_cast<double>(3 * tasks.size());
            CHECK_THAT(micro_simulate(tasks, p, dt).makespan_ms, WithinAbs(exact, band));
        }
    }
}

TEST_CASE("micro-step reference converges as dt halves", "[oracle][property]") {
    for (const std::string& name : bk_benchmark_names()) {
        const auto tasks = load_bk_benchmark(name).tasks;
        for (const DeviceProfile& p : {default_one_dma_profile(), default_two_dma_profile()}) {
            for (double dt : {0.004, 0.002}) {
                const double coarse = micro_simulate(tasks, p, dt).makespan_ms;
                const double fine = micro_simulate(tasks, p, dt / 2).makespan_ms;
                CHECK(std::abs(coarse - fine) <= dt + 1e-9);
            }
        }
    }
}

TEST_CASE("ordering enumeration", "[oracle]") {
    const auto all = enumerate_orderings(OrderingSpace{{4}}, 100, 1);
    REQUIRE(all.size() == 24);
    std::vector<std::size_t> idx{0, 1, 2, 3};
    std::size_t i = 0;
    do {
        CHECK(all[i++] == idx);
    } while (std::next_permutation(idx.begin(), idx.end()));

    const OrderingSpace grouped{{2, 3}};
    CHECK(grouped.count() == 12);
    const auto g = enumerate_orderings(grouped, 1000, 1);
    REQUIRE(g.size() == 12);
    std::set<std::vector<std::size_t>> distinct(g.begin(), g.end());
    CHECK(distinct.size() == 12);
    for (const auto& o : g) {
        CHECK(std::set<std::size_t>(o.begin(), o.begin() + 2) == std::set<std::size_t>{0, 1});
        CHECK(std::set<std::size_t>(o.begin() + 2, o.end()) == std::set<std::size_t>{2, 3, 4});
    }

    CHECK(OrderingSpace{{30}}.count() == std::numeric_limits<std::uint64_t>::max());
    CHECK_THROWS_AS(enumerate_orderings(OrderingSpace{{3}}, 0, 1), InvalidArgument);
}

TEST_CASE("sampled enumeration is distinct and seeded", "[oracle][property]") {
    for (const OrderingSpace& space : {OrderingSpace{{8}}, OrderingSpace{{25}}, OrderingSpace{{4, 4, 4}}}) {
        const auto a = enumerate_orderings(space, 500, 9);
        const auto b = enumerate_orderings(space, 500, 9);
        const auto c = enumerate_orderings(space, 500, 10);
        CHECK(a.size() == 500);
        CHECK(a == b);
        CHECK(a != c);
        CHECK(std::set<std::vector<std::size_t>>(a.begin(), a.end()).size() == 500);
        for (const auto& o : a) {
            std::vector<std::size_t> sorted = o;
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
        }
    }
}

TEST_CASE("exhaustive search", "[oracle]") {
    const auto bk50 = load_bk_benchmark("BK50").tasks;
    const DeviceProfile p = default_two_dma_profile();
    const PermutationReport r = exhaustive_search(bk50, p);
    REQUIRE(r.entries.size() == 24);
    CHECK(r.total_orderings == 24);
    CHECK_FALSE(r.sampled);
    CHECK(r.best_ms <= r.median_ms);
    CHECK(r.median_ms <= r.worst_ms);

    std::vector<double> direct;
    for (const auto& order : all_permutations(bk50)) direct.push_back(simulate(order, p).makespan_ms);
    std::sort(direct.begin(), direct.end());
    CHECK(r.best_ms == direct.front());
    CHECK(r.worst_ms == direct.back());
    CHECK(r.median_ms == 0.5 * (direct[11] + direct[12]));

    // The best entry re-simulates to the reported value.
    std::vector<TaskSpec> best;
    for (const std::string& id : r.best().order) best.push_back(table2(id));
    CHECK(simulate(best, p).makespan_ms == r.best_ms);

    const PermutationReport one = exhaustive_search(std::vector<TaskSpec>{table2("T3")}, p);
    CHECK(one.entries.size() == 1);
    CHECK(one.best_ms == one.worst_ms);
}

TEST_CASE("sampled search over eight tasks is reproducible", "[oracle]") {
    const auto tasks = load_table2_tasks();
    const DeviceProfile p = default_two_dma_profile();
    const PermutationReport a = exhaustive_search(tasks, p, 1000, 7);
    const PermutationReport b = exhaustive_search(tasks, p, 1000, 7);
    CHECK(a.entries.size() == 1000);
    CHECK(a.total_orderings == 40320);
    CHECK(a.sampled);
    CHECK(a == b);
}

TEST_CASE("serial and parallel sweeps produce identical reports", "[oracle][property]") {
    const DeviceProfile p = default_two_dma_profile();
    const auto tasks = load_table2_tasks();
    CHECK(exhaustive_search(tasks, p, 2000, 3, Execution::Serial) ==
          exhaustive_search(tasks, p, 2000, 3, Execution::Parallel));
    const auto bk = load_bk_benchmark("BK25").tasks;
    const CrossCheck s = cross_check(bk, p, 0.01, kDefaultPermutationCap, kDefaultSeed, Execution::Serial);
    const CrossCheck q = cross_check(bk, p, 0.01, kDefaultPermutationCap, kDefaultSeed, Execution::Parallel);
    CHECK(s.orderings == q.orderings);
    CHECK(s.max_abs_deviation_ms == q.max_abs_deviation_ms);
}

TEST_CASE("identical tasks give a flat distribution", "[oracle][property]") {
    std::vector<TaskSpec> same;
    for (int i = 0; i < 5; ++i) same.push_back(TaskSpec::from_times("s" + std::to_string(i), 2, 3, 1.5));
    for (const DeviceProfile& p : {default_one_dma_profile(), default_two_dma_profile()}) {
        const PermutationReport r = exhaustive_search(same, p);
        CHECK(r.entries.size() == 120);
        CHECK(r.best_ms == r.worst_ms);
    }
}

TEST_CASE("percentile and summary statistics", "[oracle]") {
    PermutationReport r;
    for (double m : {4.0, 1.0, 3.0, 2.0}) r.entries.push_back({{"x"}, m});
    summarize(r);
    CHECK(r.best_ms == 1.0);
    CHECK(r.best_index == 1);
    CHECK(r.worst_ms == 4.0);
    CHECK(r.median_ms == 2.5);
    CHECK_THAT(r.geomean_ms, WithinAbs(std::pow(24.0, 0.25), 1e-12));
    CHECK(r.percentile_of(1.0) == 0.0);
    CHECK(r.percentile_of(3.0) == 50.0);
    CHECK(r.percentile_of(10.0) == 100.0);
}
