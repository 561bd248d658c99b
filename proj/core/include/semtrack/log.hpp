#pragma once

#include <string_view>

// Diagnostics go to stderr and are gated by the SEMTRACK_LOG environment
// variable (error|warn|info|debug). Default level is warn.
namespace semtrack::log {

enum class Level { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

Level threshold();
bool enabled(Level level);
void write(Level level, std::string_view message);

inline void error(std::string_view m) { write(Level::kError, m); }
inline void warn(std::string_view m) { write(Level::kWarn, m); }
inline void info(std::string_view m) { write(Level::kInfo, m); }
inline void debug(std::string_view m) { write(Level::kDebug, m); }

}  // namespace semtrack::log
