#pragma once

#include <string>

namespace wpic {

/// Set the log level from WPIC_LOG (error, info or debug; default info).
/// Unknown values fall back to info with a warning.
void configure_logging();
void set_log_level(const std::string& level);

}  // namespace wpic
