#pragma once

#include <cstdint>
#include <string>

#include "core/value.hpp"

namespace agentest::runtime {

inline constexpr std::int64_t k_envelope_version = 1;

// Unit of migration: serialized agent state plus the behavior to rebuild it
// with. Code never travels; the destination must already know the behavior.
struct AgentEnvelope {
    std::string agent;
    std::string behavior;
    Bytes state_blob;
    std::int64_t version = k_envelope_version;
    Bytes mac;

    // Canonical bytes the MAC covers: agent, behavior, state_blob and version.
    Bytes signed_bytes() const;
    void seal(const Bytes& secret);
    bool verify(const Bytes& secret) const;

    Value to_value() const;
    static AgentEnvelope from_value(const Value& v);
};

} // namespace agentest::runtime
