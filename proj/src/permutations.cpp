#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

#include "tgorder/error.hpp"
#include "tgorder/oracle.hpp"

namespace tgorder {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > kSaturated / a) return kSaturated;
    return a * b;
}

std::uint64_t factorial(std::size_t n) {
    std::uint64_t f = 1;
    for (std::size_t i = 2; i <= n; ++i) f = saturating_mul(f, i);
    return f;
}

// Decodes a mixed-radix index (group 0 most significant, each digit a
// Lehmer code) into a flat ordering.
std::vector<std::size_t> decode(const OrderingSpace& space, std::uint64_t index) {
    const std::size_t groups = space.group_sizes.size();
    std::vector<std::uint64_t> digits(groups);
    for (std::size_t g = groups; g-- > 0;) {
        const std::uint64_t radix = factorial(space.group_sizes[g]);
        digits[g] = index % radix;
        index /= radix;
    }

    std::vector<std::size_t> order;
    order.reserve(space.items());
    std::size_t offset = 0;
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t size = space.group_sizes[g];
        std::vector<std::size_t> pool(size);
        std::iota(pool.begin(), pool.end(), offset);
        std::uint64_t code = digits[g];
        for (std::size_t pos = 0; pos < size; ++pos) {
            const std::uint64_t block = factorial(size - pos - 1);
            const auto pick = static_cast<std::size_t>(code / block);
            code %= block;
            order.push_back(pool[pick]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        offset += size;
    }
    return order;
}

}  // namespace

std::size_t OrderingSpace::items() const {
    return std::accumulate(group_sizes.begin(), group_sizes.end(), std::size_t{0});
}

std::uint64_t OrderingSpace::count() const {
    std::uint64_t total = 1;
    for (std::size_t size : group_sizes) total = saturating_mul(total, factorial(size));
    return total;
}

std::vector<std::vector<std::size_t>> enumerate_orderings(const OrderingSpace& space,
                                                          std::size_t cap, std::uint64_t seed) {
    if (cap == 0) throw InvalidArgument("ordering cap must be at least 1");
    const std::uint64_t total = space.count();
    std::vector<std::vector<std::size_t>> result;

    if (total <= cap) {
        result.reserve(total);
        for (std::uint64_t i = 0; i < total; ++i) result.push_back(decode(space, i));
        return result;
    }

    std::mt19937_64 rng(seed);
    if (total != kSaturated) {
        // Floyd's algorithm: `cap` distinct indices from [0, total).
        std::unordered_set<std::uint64_t> picked;
        picked.reserve(cap * 2);
        for (std::uint64_t j = total - cap; j < total; ++j) {
            const std::uint64_t r = std::uniform_int_distribution<std::uint64_t>(0, j)(rng);
            if (!picked.insert(r).second) picked.insert(j);
        }
        std::vector<std::uint64_t> indices(picked.begin(), picked.end());
        std::sort(indices.begin(), indices.end());
        result.reserve(indices.size());
        for (std::uint64_t i : indices) result.push_back(decode(space, i));
        return result;
    }

    // Too many orderings to index: shuffle each group and drop repeats.
    std::set<std::vector<std::size_t>> seen;
    while (seen.size() < cap) {
        std::vector<std::size_t> order;
        std::size_t offset = 0;
        for (std::size_t size : space.group_sizes) {
            std::vector<std::size_t> group(size);
            std::iota(group.begin(), group.end(), offset);
            std::shuffle(group.begin(), group.end(), rng);
            order.insert(order.end(), group.begin(), group.end());
            offset += size;
        }
        seen.insert(std::move(order));
    }
    return {seen.begin(), seen.end()};
}

double PermutationReport::percentile_of(double makespan_ms) const {
    if (entries.empty()) return 0.0;
    const double tol = 1e-9 * std::max(1.0, std::abs(makespan_ms));
    const auto faster = std::count_if(entries.begin(), entries.end(), [&](const auto& e) {
        return e.makespan_ms < makespan_ms - tol;
    });
    return 100.0 * static_cast<double>(faster) / static_cast<double>(entries.size());
}

void summarize(PermutationReport& report) {
    if (report.entries.empty()) throw InvalidArgument("permutation report has no entries");
    std::vector<double> spans;
    spans.reserve(report.entries.size());
    double log_sum = 0.0;
    report.best_index = 0;
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        const double m = report.entries[i].makespan_ms;
        spans.push_back(m);
        log_sum += std::log(m);
        if (m < report.entries[report.best_index].makespan_ms) report.best_index = i;
    }
    std::sort(spans.begin(), spans.end());
    const std::size_t n = spans.size();
    report.best_ms = spans.front();
    report.worst_ms = spans.back();
    report.median_ms = n % 2 == 1 ? spans[n / 2] : 0.5 * (spans[n / 2 - 1] + spans[n / 2]);
    report.geomean_ms = std::exp(log_sum / static_cast<double>(n));
}

PermutationReport evaluate_orderings(const std::vector<std::vector<std::size_t>>& orderings,
                                     std::span<const std::string> ids,
                                     const OrderingEvaluator& evaluate, Execution execution) {
    const auto count = static_cast<std::ptrdiff_t>(orderings.size());
    std::vector<double> makespans(orderings.size());

    if (execution == Execution::Parallel) {
        // Each slot is written by exactly one iteration, so the result does
        // not depend on scheduling.
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            makespans[static_cast<std::size_t>(i)] = evaluate(orderings[static_cast<std::size_t>(i)]);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < count; ++i) {
            makespans[static_cast<std::size_t>(i)] = evaluate(orderings[static_cast<std::size_t>(i)]);
        }
    }

    PermutationReport report;
    report.entries.reserve(orderings.size());
    for (std::size_t i = 0; i < orderings.size(); ++i) {
        PermutationEntry entry;
        entry.makespan_ms = makespans[i];
        entry.order.reserve(orderings[i].size());
        for (std::size_t idx : orderings[i]) entry.order.push_back(ids[idx]);
        report.entries.push_back(std::move(entry));
    }
    summarize(report);
    return report;
}

PermutationReport exhaustive_search(std::span<const TaskSpec> tasks, const DeviceProfile& profile,
                                    std::size_t cap, std::uint64_t seed, Execution execution) {
    if (tasks.empty()) throw InvalidArgument("exhaustive search needs at least one task");
    const std::vector<TaskEntry> base = make_entries(tasks, profile);
    std::vector<std::string> ids;
    ids.reserve(base.size());
    for (const TaskEntry& e : base) ids.push_back(e.id);

    const OrderingSpace space{{base.size()}};
    const auto orderings = enumerate_orderings(space, cap, seed);
    const OrderingEvaluator evaluate = [&](std::span<const std::size_t> order) {
        std::vector<TaskEntry> permuted;
        permuted.reserve(order.size());
        for (std::size_t idx : order) permuted.push_back(base[idx]);
        return simulate(std::span<const TaskEntry>(permuted), profile).makespan_ms;
    };
    PermutationReport report = evaluate_orderings(orderings, ids, evaluate, execution);
    report.total_orderings = space.count();
    report.sampled = report.total_orderings > orderings.size();
    return report;
}

CrossCheck cross_check(std::span<const TaskSpec> tasks, const DeviceProfile& profile, double dt_ms,
                       std::size_t cap, std::uint64_t seed, Execution execution) {
    if (!(dt_ms > 0.0)) throw InvalidArgument("dt must be positive");
    if (tasks.empty()) throw InvalidArgument("cross_check needs at least one task");
    const std::vector<TaskEntry> base = make_entries(tasks, profile);
    const auto orderings = enumerate_orderings(OrderingSpace{{base.size()}}, cap, seed);
    const auto count = static_cast<std::ptrdiff_t>(orderings.size());

    std::vector<double> abs_dev(orderings.size());
    std::vector<double> rel_dev(orderings.size());
    auto check = [&](std::size_t i) {
        std::vector<TaskEntry> permuted;
        for (std::size_t idx : orderings[i]) permuted.push_back(base[idx]);
        const std::span<const TaskEntry> view(permuted);
        const double exact = simulate(view, profile).makespan_ms;
        const double stepped = micro_simulate(view, profile, dt_ms).makespan_ms;
        abs_dev[i] = std::abs(exact - stepped);
        rel_dev[i] = abs_dev[i] / exact;
    };
    if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t i = 0; i < count; ++i) check(static_cast<std::size_t>(i));
    } else {
        for (std::ptrdiff_t i = 0; i < count; ++i) check(static_cast<std::size_t>(i));
    }

    CrossCheck result;
    result.orderings = orderings.size();
    for (std::size_t i = 0; i < orderings.size(); ++i) {
        result.max_abs_deviation_ms = std::max(result.max_abs_deviation_ms, abs_dev[i]);
        result.max_rel_deviation = std::max(result.max_rel_deviation, rel_dev[i]);
    }
    return result;
}

}  // namespace tgorder
