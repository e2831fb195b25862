#pragma once

#include <string>

namespace maxlow {

enum class LogLevel { off = 0, error = 1, warn = 2, info = 3, debug = 4 };

// Initialized from MAXLOW_LOG (off, error, warn, info, debug); default warn.
LogLevel log_level();
void set_log_level(LogLevel level);
bool parse_log_level(const std::string& text, LogLevel& out);

void log_message(LogLevel level, const std::string& msg);
inline void log_error(const std::string& m) { log_message(LogLevel::error, m); }
inline void log_warn(const std::string& m) { log_message(LogLevel::warn, m); }
inline void log_info(const std::string& m) { log_message(LogLevel::info, m); }
inline void log_debug(const std::string& m) { log_message(LogLevel::debug, m); }

}  // namespace maxlow
