#pragma once

#include <json.hpp>

#include "behavior/task_model.hpp"
#include "runtime/platform.hpp"

namespace test_support {

namespace rt = agentest::runtime;

inline const agentest::Bytes k_secret(32, 0x5a);

// "recorder": appends (sender, conversation, seq, n) of every "note" message to data.seen.
inline void register_recorder(rt::Container& c)
{
    auto reg = std::make_shared<agentest::behavior::ActivityRegistry>();
    reg->add("record", [](const agentest::behavior::ActivityCall& call) {
        auto& ctx = rt::context_of(call);
        const auto& ev = call.args[0];
        agentest::Value row = agentest::Value::map();
        row["sender"] = ev.get_string("_sender");
        row["conversation"] = ev.get_string("_conversation");
        row["seq"] = ev.get_int("_seq");
        row["n"] = ev.get_int("n");
        ctx.data()["seen"].push_back(row);
        return agentest::Value(true);
    });
    auto doc = nlohmann::json::parse(R"({"task":"inbox","initial":"Idle","context":["ok"],
        "states":[{"name":"Idle"},{"name":"Got","activities":[{"name":"record","params":["event"],"result":"ok"}]}],
        "transitions":[{"from":"Idle","to":"Got","trigger":"note"},{"from":"Got","to":"Idle"}]})");
    c.register_behavior("recorder", {agentest::behavior::task_model_from_json(doc)}, reg);
}

inline rt::ContainerConfig inproc(const std::string& id)
{
    return {id, "in-process", k_secret, "in-process", false};
}

inline rt::Message note(const std::string& from, const std::string& to, const std::string& conv, int n)
{
    rt::Message m;
    m.sender = from;
    m.receiver = to;
    m.conversation = conv;
    m.payload["type"] = "note";
    m.payload["n"] = n;
    return m;
}

inline agentest::Value seen(rt::Container& c, const std::string& agent)
{
    agentest::Value out;
    c.with_agent(agent, [&](rt::Agent& a) {
        const auto* s = a.data.find("seen");
        out = s ? *s : agentest::Value::list();
    });
    return out;
}

} // namespace test_support
