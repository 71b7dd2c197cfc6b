/**
 * @file log.hpp
 * @brief stderr logging gated by the TRANSIENT_SCOPE_LOG environment variable
 *        (off | error | info | debug; default error).
 */
#pragma once

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

namespace tscope::log {

enum class Level { Off = 0, Error = 1, Info = 2, Debug = 3 };

inline Level level() {
  static const Level lvl = [] {
    const char* env = std::getenv("TRANSIENT_SCOPE_LOG");
    if (!env) return Level::Error;
    if (!std::strcmp(env, "off")) return Level::Off;
    if (!std::strcmp(env, "error")) return Level::Error;
    if (!std::strcmp(env, "info")) return Level::Info;
    if (!std::strcmp(env, "debug")) return Level::Debug;
    return Level::Error;
  }();
  return lvl;
}

inline void error(const std::string& msg) {
  if (level() >= Level::Error) std::fprintf(stderr, "[error] %s\n", msg.c_str());
}

inline void info(const std::string& msg) {
  if (level() >= Level::Info) std::fprintf(stderr, "[info] %s\n", msg.c_str());
}

inline void debug(const std::string& msg) {
  if (level() >= Level::Debug) std::fprintf(stderr, "[debug] %s\n", msg.c_str());
}

}  // namespace tscope::log
