#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "core/value.hpp"

namespace agentest::sas {

// Results an EA could not hand to the SA, kept on the student's machine.
struct SpooledResult {
    std::string session_id;
    Value result;
};

// <dir>/<session_id>.json, written atomically.
std::filesystem::path spool_result(const std::filesystem::path& dir, const std::string& session_id,
                                   const Value& result);
std::vector<SpooledResult> read_spool(const std::filesystem::path& dir);

} // namespace agentest::sas
