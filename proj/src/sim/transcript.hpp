#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "core/clock.hpp"
#include "runtime/container.hpp"

namespace agentest::sim {

struct TranscriptEntry {
    std::int64_t t = 0;
    std::string conversation;
    std::string performative; // empty for a migration
    std::string label;
    std::string sender;
    std::string receiver;
    std::string summary;

    // "label:senderRole>receiverRole"
    std::string token() const;
    Value to_value() const;
};

inline constexpr const char* k_pull_pattern =
    "request:paa>sa (agree:sa>paa migrate:sa>paa (question:ea>paa answer:paa>ea )*result:ea>paa |refuse:sa>paa )";
inline constexpr const char* k_push_pattern =
    "(migrate:sa>paa (question:ea>paa answer:paa>ea )*(question:ea>paa )?(close:sa>ea )?result:ea>sa inform:sa>paa "
    "|inform:sa>paa )";

// Space-terminated tokens of a conversation, e.g. "request:paa>sa agree:sa>paa ".
std::string token_string(const std::vector<TranscriptEntry>& entries);
// Pattern for a conversation id ("pull:..." or "exam:..."); nullptr for others.
const char* pattern_for(const std::string& conversation);
bool matches_protocol(const std::string& conversation, const std::vector<TranscriptEntry>& entries);

// Records agent-to-agent deliveries and EA migrations, per conversation.
// UI traffic and directory calls are left out.
class TranscriptRecorder final : public runtime::Observer {
public:
    explicit TranscriptRecorder(const Clock& clock) : clock_(clock) {}

    void on_delivered(const runtime::Message& m, const std::string& container) override;
    void on_migrated(const std::string& agent, const std::string& from, const std::string& to,
                     const Value& data) override;

    std::map<std::string, std::vector<TranscriptEntry>> conversations() const;
    // Deliveries with this label to an agent of this role so far.
    std::size_t count(const std::string& label, const std::string& receiver_role) const;

private:
    const Clock& clock_;
    mutable std::mutex mu_;
    std::map<std::string, std::vector<TranscriptEntry>> by_conversation_;
    std::map<std::string, std::size_t> counts_;
};

} // namespace agentest::sim
