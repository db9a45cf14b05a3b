#pragma once

#include <cstdint>
#include <string>

#include "eval/engine.hpp"
#include "runtime/agent.hpp"
#include "sas/protocol.hpp"

namespace agentest::sas {

// Container resources the activities look up.
inline constexpr const char* k_store_resource = "store";         // store::DocumentStore (server container)
inline constexpr const char* k_settings_resource = "sas";        // SasSettings
inline constexpr const char* k_spool_resource = "spool_dir";     // std::filesystem::path

struct SasSettings {
    std::int64_t poll_ms = k_poll_interval_ms;
    eval::PolicyOverrides defaults;
};

runtime::Behavior server_agent_behavior();
runtime::Behavior personal_assistant_behavior();
runtime::Behavior evaluation_agent_behavior();

// Initial data of a PAA.
Value paa_init(const std::string& user, const std::string& role);

// What a PAA sends after handling one event; send is "none" when nothing goes out.
struct BridgeAction {
    std::string send = "none";
    std::string to;
    std::string conversation;
    Value payload = Value::map();

    Value to_value() const;
};

// UI action -> message, recording the UI acknowledgement under desk.acks[ui_id].
// `ui` is the bound event: action, ui_id, _sender and the action's fields.
BridgeAction paa_bridge(Value& desk, const Value& ui);

// Incoming agree/refuse/failure/question/result/inform/*_reply folded into the
// desk. Returns the deferred quit when one is due.
BridgeAction paa_absorb(Value& desk, const Value& event);

// Error as a reply payload: {ok: false, code, detail}.
Value error_reply(const Error& e);

// Stored result body.
Value result_body(const eval::TestResult& r, const std::string& status, const std::string& kind,
                  const std::string& exam_id);

} // namespace agentest::sas
