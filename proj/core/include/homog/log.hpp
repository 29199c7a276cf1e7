#pragma once

#include <string>

namespace homog {

enum class LogLevel { off = 0, warn = 1, info = 2, debug = 3 };

/// Current verbosity, read once from the HOMOG_LOG environment variable
/// (off, warn, info, debug; default warn).
LogLevel log_level();

void log_warn(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

} // namespace homog
