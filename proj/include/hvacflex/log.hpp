#pragma once

// Minimal leveled logging to stderr. The level comes from HVACFLEX_LOG
// (error, info, debug); the default is info.

#include <cstdlib>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>

namespace hvacflex::log {

enum class Level { Error = 0, Info = 1, Debug = 2 };

inline Level parse_level(std::string_view s) {
  if (s == "error") return Level::Error;
  if (s == "debug") return Level::Debug;
  return Level::Info;
}

inline Level& threshold() {
  static Level level = [] {
    const char* env = std::getenv("HVACFLEX_LOG");
    return env ? parse_level(env) : Level::Info;
  }();
  return level;
}

inline void write(Level level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  static std::mutex mu;
  static constexpr const char* names[] = {"error", "info", "debug"};
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << "[" << names[static_cast<int>(level)] << "] " << msg << "\n";
}

template <typename... Args>
void emit(Level level, const Args&... args) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  std::ostringstream os;
  (os << ... << args);
  write(level, os.str());
}

template <typename... Args>
void error(const Args&... args) { emit(Level::Error, args...); }
template <typename... Args>
void info(const Args&... args) { emit(Level::Info, args...); }
template <typename... Args>
void debug(const Args&... args) { emit(Level::Debug, args...); }

}  // namespace hvacflex::log
