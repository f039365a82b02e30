#pragma once

#include <spdlog/spdlog.h>

namespace wpic::log {

using spdlog::debug;
using spdlog::error;
using spdlog::info;
using spdlog::warn;

}  // namespace wpic::log
