#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "core/value.hpp"

namespace agentest::runtime {

enum class Performative { request, inform, agree, refuse, failure };

std::string_view to_string(Performative p);
std::optional<Performative> performative_from(std::string_view s);
// Throws Error(invalid_argument) for anything outside the closed set.
Performative parse_performative(std::string_view s);

struct AgentId {
    std::string name;
    std::string home_container;

    friend bool operator==(const AgentId&, const AgentId&) = default;
};

struct Message {
    std::string sender;
    std::string receiver;
    Performative performative = Performative::inform;
    std::string conversation;
    std::int64_t seq = 0;
    Value payload = Value::map();

    // payload.type when it is a string, else the performative name.
    std::string label() const;

    Value to_value() const;
    static Message from_value(const Value& v);

    friend bool operator==(const Message&, const Message&) = default;
};

struct DeliveryReceipt {
    std::string container;
    std::int64_t epoch = 0;
    bool duplicate = false;
};

} // namespace agentest::runtime
