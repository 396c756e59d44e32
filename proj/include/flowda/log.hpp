#pragma once

#include <cstdio>
#include <mutex>
#include <string>

namespace flowda::log {

enum class Level : int { quiet = 0, warn = 1, info = 2, debug = 3 };

inline Level& verbosity() {
  static Level level = Level::warn;
  return level;
}

inline std::mutex& mutex() {
  static std::mutex m;
  return m;
}

inline void emit(Level level, const char* tag, const std::string& message) {
  if (static_cast<int>(level) > static_cast<int>(verbosity())) return;
  std::lock_guard<std::mutex> guard(mutex());
  std::fprintf(stderr, "[%s] %s\n", tag, message.c_str());
}

inline void warn(const std::string& message) { emit(Level::warn, "warn", message); }
inline void info(const std::string& message) { emit(Level::info, "info", message); }
inline void debug(const std::string& message) { emit(Level::debug, "debug", message); }

}  // namespace flowda::log
