#include "maxlow/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>

namespace maxlow {

namespace {

LogLevel from_env() {
    const char* s = std::getenv("MAXLOW_LOG");
    LogLevel l = LogLevel::warn;
    if (s && !parse_log_level(s, l)) {
        std::cerr << "maxlow: ignoring MAXLOW_LOG='" << s << "'\n";
        l = LogLevel::warn;
    }
    return l;
}

std::atomic<int>& level_store() {
    static std::atomic<int> level{static_cast<int>(from_env())};
    return level;
}

const char* tag(LogLevel l) {
    switch (l) {
        case LogLevel::error: return "error";
        case LogLevel::warn: return "warn";
        case LogLevel::info: return "info";
        case LogLevel::debug: return "debug";
        default: return "";
    }
}

}  // namespace

bool parse_log_level(const std::string& t, LogLevel& out) {
    if (t == "off") out = LogLevel::off;
    else if (t == "error") out = LogLevel::error;
    else if (t == "warn" || t == "warning") out = LogLevel::warn;
    else if (t == "info") out = LogLevel::info;
    else if (t == "debug") out = LogLevel::debug;
    else return false;
    return true;
}

LogLevel log_level() { return static_cast<LogLevel>(level_store().load()); }
void set_log_level(LogLevel level) { level_store().store(static_cast<int>(level)); }

void log_message(LogLevel level, const std::string& msg) {
    if (level == LogLevel::off || static_cast<int>(level) > level_store().load()) return;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "[maxlow " << tag(level) << "] " << msg << '\n';
}

}  // namespace maxlow
