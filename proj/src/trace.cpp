#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"
#include "tgorder/engine.hpp"

namespace tgorder {

namespace {

long long to_us(double ms) { return std::llround(ms * 1000.0); }

}  // namespace

std::string export_trace(const Timeline& timeline) {
    nlohmann::json events = nlohmann::json::array();
    for (const Command& c : timeline.commands) {
        const long long ts = to_us(c.start_ms);
        const std::string kind(to_string(c.kind));
        events.push_back({
            {"name", c.task_id + " " + kind},
            {"cat", kind},
            {"ph", "X"},
            {"ts", ts},
            {"dur", to_us(c.end_ms) - ts},
            {"pid", 1},
            {"tid", static_cast<int>(c.kind)},
            {"args", {{"task", c.task_id}, {"group", c.group}}},
        });
    }
    nlohmann::json doc = {{"traceEvents", events}, {"displayTimeUnit", "ms"}};
    return doc.dump(1) + "\n";
}

std::string export_table(const Timeline& timeline) {
    std::ostringstream out;
    out << "task_id,kind,start_ms,end_ms\n";
    char buf[64];
    for (const Command& c : timeline.commands) {
        std::snprintf(buf, sizeof buf, "%.3f,%.3f", c.start_ms, c.end_ms);
        out << c.task_id << ',' << to_string(c.kind) << ',' << buf << '\n';
    }
    return out.str();
}

}  // namespace tgorder
