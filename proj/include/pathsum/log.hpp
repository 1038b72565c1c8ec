#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace pathsum {

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

// Verbosity comes from PATHSUM_LOG (error|warn|info|debug); default warn.
inline LogLevel logLevel() {
  static const LogLevel level = [] {
    const char* env = std::getenv("PATHSUM_LOG");
    if (!env) return LogLevel::Warn;
    const std::string value(env);
    if (value == "error") return LogLevel::Error;
    if (value == "warn") return LogLevel::Warn;
    if (value == "info") return LogLevel::Info;
    if (value == "debug") return LogLevel::Debug;
    return LogLevel::Warn;
  }();
  return level;
}

inline void logMessage(LogLevel level, const std::string& message) {
  if (level > logLevel()) return;
  const char* tag = "warn";
  switch (level) {
    case LogLevel::Error: tag = "error"; break;
    case LogLevel::Warn: tag = "warn"; break;
    case LogLevel::Info: tag = "info"; break;
    case LogLevel::Debug: tag = "debug"; break;
  }
  std::fprintf(stderr, "[pathsum] %s: %s\n", tag, message.c_str());
}

}  // namespace pathsum
