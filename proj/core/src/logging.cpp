#include "egotraj/logging.hpp"

#include <cstdio>
#include <cstdlib>
#include <mutex>

namespace egotraj::log {

namespace {

Level parse_level() {
  const char* env = std::getenv("EGOTRAJ_LOG");
  if (!env) return Level::warn;
  const std::string v(env);
  if (v == "error") return Level::error;
  if (v == "warn") return Level::warn;
  if (v == "info") return Level::info;
  if (v == "debug") return Level::debug;
  return Level::warn;
}

const char* level_name(Level l) {
  switch (l) {
    case Level::error:
      return "error";
    case Level::warn:
      return "warn";
    case Level::info:
      return "info";
    case Level::debug:
      return "debug";
  }
  return "warn";
}

std::mutex& io_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Level threshold() {
  static const Level cached = parse_level();
  return cached;
}

void write(Level level, const std::string& msg) {
  if (static_cast<int>(level) > static_cast<int>(threshold())) return;
  std::lock_guard<std::mutex> guard(io_mutex());
  std::fprintf(stderr, "[egotraj][%s] %s\n", level_name(level), msg.c_str());
  std::fflush(stderr);
}

}  // namespace egotraj::log
