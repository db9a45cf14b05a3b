#include "sim/transcript.hpp"

#include <regex>

#include "sas/protocol.hpp"

namespace agentest::sim {

std::string TranscriptEntry::token() const
{
    return label + ":" + sas::role_of(sender) + ">" + sas::role_of(receiver);
}

Value TranscriptEntry::to_value() const
{
    Value v = Value::map();
    v["t"] = t;
    v["performative"] = performative;
    v["label"] = label;
    v["sender"] = sender;
    v["receiver"] = receiver;
    v["sender_role"] = sas::role_of(sender);
    v["receiver_role"] = sas::role_of(receiver);
    v["summary"] = summary;
    return v;
}

std::string token_string(const std::vector<TranscriptEntry>& entries)
{
    std::string s;
    for (const auto& e : entries)
        s += e.token() + " ";
    return s;
}

const char* pattern_for(const std::string& conversation)
{
    if (conversation.starts_with("pull:"))
        return k_pull_pattern;
    if (conversation.starts_with("exam:"))
        return k_push_pattern;
    return nullptr;
}

bool matches_protocol(const std::string& conversation, const std::vector<TranscriptEntry>& entries)
{
    const char* p = pattern_for(conversation);
    if (!p)
        return true;
    static const std::regex pull(k_pull_pattern);
    static const std::regex push(k_push_pattern);
    return std::regex_match(token_string(entries), p == k_pull_pattern ? pull : push);
}

void TranscriptRecorder::on_delivered(const runtime::Message& m, const std::string&)
{
    if (m.sender.starts_with("ui:") || m.receiver.starts_with("$") || m.sender.starts_with("$"))
        return;
    TranscriptEntry e;
    e.t = clock_.now_ms();
    e.conversation = m.conversation;
    e.performative = std::string(runtime::to_string(m.performative));
    e.label = m.label();
    e.sender = m.sender;
    e.receiver = m.receiver;
    e.summary = sas::payload_summary(m.payload);
    std::lock_guard lock(mu_);
    ++counts_[e.label + ">" + sas::role_of(e.receiver)];
    by_conversation_[e.conversation].push_back(std::move(e));
}

void TranscriptRecorder::on_migrated(const std::string& agent, const std::string& from, const std::string& to,
                                     const Value& data)
{
    if (sas::role_of(agent) != "ea")
        return;
    TranscriptEntry e;
    e.t = clock_.now_ms();
    e.conversation = data.get_string("conversation");
    e.label = "migrate";
    e.sender = data.get_string("sa", sas::k_sa_name);
    e.receiver = data.get_string("paa");
    e.summary = agent + " " + from + "->" + to;
    std::lock_guard lock(mu_);
    by_conversation_[e.conversation].push_back(std::move(e));
}

std::map<std::string, std::vector<TranscriptEntry>> TranscriptRecorder::conversations() const
{
    std::lock_guard lock(mu_);
    return by_conversation_;
}

std::size_t TranscriptRecorder::count(const std::string& label, const std::string& receiver_role) const
{
    std::lock_guard lock(mu_);
    auto it = counts_.find(label + ">" + receiver_role);
    return it == counts_.end() ? 0 : it->second;
}

} // namespace agentest::sim
