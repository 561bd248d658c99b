#include "semtrack/log.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

namespace semtrack::log {

namespace {

Level parse_level() {
  const char* env = std::getenv("SEMTRACK_LOG");
  if (env == nullptr) return Level::kWarn;
  const std::string value(env);
  if (value == "error") return Level::kError;
  if (value == "warn") return Level::kWarn;
  if (value == "info") return Level::kInfo;
  if (value == "debug") return Level::kDebug;
  return Level::kWarn;
}

const char* level_name(Level level) {
  switch (level) {
    case Level::kError: return "error";
    case Level::kWarn: return "warn";
    case Level::kInfo: return "info";
    case Level::kDebug: return "debug";
  }
  return "?";
}

}  // namespace

Level threshold() {
  static const Level level = parse_level();
  return level;
}

bool enabled(Level level) {
  return static_cast<int>(level) <= static_cast<int>(threshold());
}

void write(Level level, std::string_view message) {
  if (!enabled(level)) return;
  std::cerr << "semtrack: " << level_name(level) << ": " << message << '\n';
}

}  // namespace semtrack::log
