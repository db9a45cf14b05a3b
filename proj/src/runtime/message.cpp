#include "runtime/message.hpp"

#include "core/error.hpp"

namespace agentest::runtime {

std::string_view to_string(Performative p)
{
    switch (p) {
    case Performative::request: return "request";
    case Performative::inform: return "inform";
    case Performative::agree: return "agree";
    case Performative::refuse: return "refuse";
    case Performative::failure: return "failure";
    }
    return "?";
}

std::optional<Performative> performative_from(std::string_view s)
{
    if (s == "request") return Performative::request;
    if (s == "inform") return Performative::inform;
    if (s == "agree") return Performative::agree;
    if (s == "refuse") return Performative::refuse;
    if (s == "failure") return Performative::failure;
    return std::nullopt;
}

Performative parse_performative(std::string_view s)
{
    auto p = performative_from(s);
    if (!p)
        fail(Errc::invalid_argument, "unknown performative '" + std::string(s) + "'");
    return *p;
}

std::string Message::label() const
{
    if (auto* t = payload.find("type"); t && t->is_string())
        return t->as_string();
    return std::string(to_string(performative));
}

Value Message::to_value() const
{
    Value v = Value::map();
    v["sender"] = sender;
    v["receiver"] = receiver;
    v["performative"] = std::string(to_string(performative));
    v["conversation"] = conversation;
    v["seq"] = seq;
    v["payload"] = payload;
    return v;
}

Message Message::from_value(const Value& v)
{
    if (!v.is_map())
        fail(Errc::bad_frame, "message body is not a map");
    Message m;
    m.sender = v.get_string("sender");
    m.receiver = v.get_string("receiver");
    auto p = performative_from(v.get_string("performative"));
    if (!p)
        fail(Errc::bad_frame, "message carries unknown performative '" + v.get_string("performative") + "'");
    m.performative = *p;
    m.conversation = v.get_string("conversation");
    m.seq = v.get_int("seq");
    if (m.seq < 0)
        fail(Errc::bad_frame, "negative sequence number");
    if (auto* pl = v.find("payload"); pl && pl->is_map())
        m.payload = *pl;
    if (m.receiver.empty())
        fail(Errc::bad_frame, "message without receiver");
    return m;
}

} // namespace agentest::runtime
