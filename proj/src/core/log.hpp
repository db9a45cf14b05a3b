#pragma once

#include <spdlog/spdlog.h>

namespace agentest {

// Process-wide logger writing to stderr. Level comes from AGENTEST_LOG
// (trace|debug|info|warn|error|off), default warn.
spdlog::logger& log();

} // namespace agentest
