#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agentest {

enum class Errc {
    ok = 0,
    // runtime
    address_in_use,
    directory_unreachable,
    duplicate_container,
    duplicate_behavior,
    unknown_behavior,
    duplicate_agent,
    unknown_receiver,
    transport_failure,
    mac_invalid,
    behavior_unregistered,
    not_found,
    bad_frame,
    // behavior engine
    invalid_model,
    unknown_task,
    missing_activity,
    activity_failed,
    guard_error,
    // evaluation engine
    missing_answer,
    invalid_question,
    unknown_question,
    type_mismatch,
    session_mismatch,
    out_of_order,
    duplicate_answer,
    unfinished_session,
    // storage
    version_conflict,
    io_error,
    referential_in_use,
    // assessment service
    unknown_test,
    unknown_topic,
    window_not_open,
    window_closed,
    invalid_window,
    no_active_session,
    live_session_exists,
    refused,
    // gateway / tooling
    unauthorized,
    forbidden,
    invalid_argument,
    parse_error,
    schema_error,
    timeout,
    internal,
};

std::string_view errc_name(Errc code) noexcept;
Errc errc_from_name(std::string_view name) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& detail)
        : std::runtime_error(detail), code_(code) {}

    Errc code() const noexcept { return code_; }
    std::string_view code_name() const noexcept { return errc_name(code_); }
    std::string detail() const { return what(); }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& detail) { throw Error(code, detail); }

} // namespace agentest
