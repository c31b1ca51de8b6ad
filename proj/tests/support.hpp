#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "tgorder/engine.hpp"
#include "tgorder/model.hpp"
#include "tgorder/workload.hpp"

namespace tgtest {

using namespace tgorder;

inline TaskSpec table2(const std::string& id) {
    for (const TaskSpec& t : load_table2_tasks()) {
        if (t.id == id) return t;
    }
    throw std::out_of_range(id);
}

inline std::vector<TaskSpec> pick(const std::vector<std::string>& ids) {
    std::vector<TaskSpec> out;
    for (const auto& id : ids) out.push_back(table2(id));
    return out;
}

inline DeviceProfile two_dma(double sigma) {
    return DeviceProfile("test-2dma", 2, {0.0, 1e6}, {0.0, 1e6}, sigma);
}

inline DeviceProfile one_dma() {
    return DeviceProfile("test-1dma", 1, {0.0, 1e6}, {0.0, 1e6}, 1.0);
}

// Every permutation of `tasks`, produced with std::next_permutation over
// indices so it shares nothing with the library's enumerator.
inline std::vector<std::vector<TaskSpec>> all_permutations(const std::vector<TaskSpec>& tasks) {
    std::vector<std::size_t> idx(tasks.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::vector<std::vector<TaskSpec>> out;
    do {
        std::vector<TaskSpec> p;
        for (std::size_t i : idx) p.push_back(tasks[i]);
        out.push_back(std::move(p));
    } while (std::next_permutation(idx.begin(), idx.end()));
    return out;
}

inline std::vector<const Command*> of_kind(const Timeline& t, CommandKind kind) {
    std::vector<const Command*> out;
    for (const Command& c : t.commands) {
        if (c.kind == kind) out.push_back(&c);
    }
    return out;
}

inline bool overlaps(const Command& a, const Command& b, double tol = 1e-9) {
    return a.start_ms < b.end_ms - tol && b.start_ms < a.end_ms - tol;
}

}  // namespace tgtest
