#include "core/error.hpp"

#include <utility>

namespace agentest {

namespace {

constexpr std::pair<Errc, std::string_view> k_names[] = {
    {Errc::ok, "ok"},
    {Errc::address_in_use, "address-in-use"},
    {Errc::directory_unreachable, "directory-unreachable"},
    {Errc::duplicate_container, "duplicate-container"},
    {Errc::duplicate_behavior, "duplicate-behavior"},
    {Errc::unknown_behavior, "unknown-behavior"},
    {Errc::duplicate_agent, "duplicate-agent"},
    {Errc::unknown_receiver, "unknown-receiver"},
    {Errc::transport_failure, "transport-failure"},
    {Errc::mac_invalid, "mac-invalid"},
    {Errc::behavior_unregistered, "behavior-unregistered"},
    {Errc::not_found, "not-found"},
    {Errc::bad_frame, "bad-frame"},
    {Errc::invalid_model, "invalid-model"},
    {Errc::unknown_task, "unknown-task"},
    {Errc::missing_activity, "missing-activity"},
    {Errc::activity_failed, "activity-failed"},
    {Errc::guard_error, "guard-error"},
    {Errc::missing_answer, "missing-answer"},
    {Errc::invalid_question, "invalid-question"},
    {Errc::unknown_question, "unknown-question"},
    {Errc::type_mismatch, "type-mismatch"},
    {Errc::session_mismatch, "session-mismatch"},
    {Errc::out_of_order, "out-of-order"},
    {Errc::duplicate_answer, "duplicate-answer"},
    {Errc::unfinished_session, "unfinished-session"},
    {Errc::version_conflict, "version-conflict"},
    {Errc::io_error, "io-error"},
    {Errc::referential_in_use, "referential-in-use"},
    {Errc::unknown_test, "unknown-test"},
    {Errc::unknown_topic, "unknown-topic"},
    {Errc::window_not_open, "window-not-open"},
    {Errc::window_closed, "window-closed"},
    {Errc::invalid_window, "invalid-window"},
    {Errc::no_active_session, "no-active-session"},
    {Errc::live_session_exists, "live-session-exists"},
    {Errc::refused, "refused"},
    {Errc::unauthorized, "unauthorized"},
    {Errc::forbidden, "forbidden"},
    {Errc::invalid_argument, "invalid-argument"},
    {Errc::parse_error, "parse-error"},
    {Errc::schema_error, "schema-error"},
    {Errc::timeout, "timeout"},
    {Errc::internal, "internal"},
};

} // namespace

std::string_view errc_name(Errc code) noexcept
{
    for (const auto& [c, name] : k_names)
        if (c == code)
            return name;
    return "internal";
}

Errc errc_from_name(std::string_view name) noexcept
{
    for (const auto& [c, n] : k_names)
        if (n == name)
            return c;
    return Errc::internal;
}

} // namespace agentest
