#include "core/log.hpp"

#include <cstdlib>

#include <spdlog/sinks/stdout_sinks.h>

namespace agentest {

spdlog::logger& log()
{
    static auto instance = [] {
        auto l = std::make_shared<spdlog::logger>(
            "agentest", std::make_shared<spdlog::sinks::stderr_sink_mt>());
        const char* env = std::getenv("AGENTEST_LOG");
        l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
        return l;
    }();
    return *instance;
}

} // namespace agentest
