#include "runtime/envelope.hpp"

#include "core/crypto.hpp"
#include "core/error.hpp"

namespace agentest::runtime {

Bytes AgentEnvelope::signed_bytes() const
{
    Value v = Value::map();
    v["agent"] = agent;
    v["behavior"] = behavior;
    v["state_blob"] = state_blob;
    v["version"] = version;
    return encode_canonical(v);
}

void AgentEnvelope::seal(const Bytes& secret)
{
    mac = crypto::hmac_sha256(secret, signed_bytes());
}

bool AgentEnvelope::verify(const Bytes& secret) const
{
    return version == k_envelope_version && crypto::constant_time_equal(mac, crypto::hmac_sha256(secret, signed_bytes()));
}

Value AgentEnvelope::to_value() const
{
    Value v = Value::map();
    v["agent"] = agent;
    v["behavior"] = behavior;
    v["state_blob"] = state_blob;
    v["version"] = version;
    v["mac"] = mac;
    return v;
}

AgentEnvelope AgentEnvelope::from_value(const Value& v)
{
    auto* blob = v.find("state_blob");
    auto* mac = v.find("mac");
    if (!blob || !blob->is_bytes() || !mac || !mac->is_bytes())
        fail(Errc::bad_frame, "envelope needs byte fields state_blob and mac");
    AgentEnvelope e;
    e.agent = v.get_string("agent");
    e.behavior = v.get_string("behavior");
    e.state_blob = blob->as_bytes();
    e.version = v.get_int("version");
    e.mac = mac->as_bytes();
    return e;
}

} // namespace agentest::runtime
