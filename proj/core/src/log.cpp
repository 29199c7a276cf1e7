#include "homog/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace homog {

static LogLevel parse_level() {
  const char* env = std::getenv("HOMOG_LOG");
  if (!env) return LogLevel::warn;
  std::string v(env);
  if (v == "off" || v == "0") return LogLevel::off;
  if (v == "warn") return LogLevel::warn;
  if (v == "info") return LogLevel::info;
  if (v == "debug") return LogLevel::debug;
  return LogLevel::warn;
}

LogLevel log_level() {
  static LogLevel level = parse_level();
  return level;
}

static std::mutex log_mutex;

static void emit(const char* tag, const std::string& msg) {
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << "[homog:" << tag << "] " << msg << "\n";
}

void log_warn(const std::string& msg) {
  if (log_level() >= LogLevel::warn) emit("warn", msg);
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::info) emit("info", msg);
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::debug) emit("debug", msg);
}

} // namespace homog
