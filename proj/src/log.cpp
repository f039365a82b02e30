#include "wpic/log.hpp"

#include <cstdlib>

#include <spdlog/sinks/stdout_color_sinks.h>

#include "log.hpp"

namespace wpic {

void set_log_level(const std::string& level) {
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
    if (level != "info") log::warn("unknown WPIC_LOG value '{}', using info", level);
  }
}

void configure_logging() {
  // Log to stderr so stdout stays clean for tables and numbers.
  auto logger = spdlog::get("wpic");
  if (!logger) {
    logger = spdlog::stderr_color_mt("wpic");
    logger->set_pattern("[%l] %v");
  }
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("WPIC_LOG");
  set_log_level(env ? env : "info");
}

}  // namespace wpic
