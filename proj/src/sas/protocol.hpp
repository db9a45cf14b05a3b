#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eval/engine.hpp"
#include "store/document_store.hpp"

namespace agentest::sas {

inline constexpr const char* k_sa_behavior = "server_agent";
inline constexpr const char* k_paa_behavior = "personal_assistant";
inline constexpr const char* k_ea_behavior = "evaluation_agent";
inline constexpr const char* k_sa_name = "sa";
inline constexpr std::int64_t k_poll_interval_ms = 1000;

std::string student_paa(const std::string& student);       // "paa:<student>"
std::string instructor_paa(const std::string& instructor); // "ipa:<instructor>"
std::string ui_sender(const std::string& user);            // "ui:<user>"
std::string pull_ea(const std::string& session_id);        // "ea:<session>"
std::string push_ea(const std::string& exam_id, const std::string& student); // "ea:<exam>:<student>"
std::string push_session(const std::string& exam_id, const std::string& student);

// Role of an agent name for transcripts: sa, paa, ipa, ea, ui or "?".
std::string role_of(const std::string& agent);

enum class RequestKind { pull_self_assessment, push_exam };

struct SelfAssessmentConfig {
    std::string test_id;                 // either a stored test...
    std::string topic;                   // ...or every bank question on a topic
    std::optional<int> count;            // questions to ask
    std::optional<int> start_difficulty;

    Value to_value() const;
    static SelfAssessmentConfig from_value(const Value& v);
};

struct ExamSchedule {
    std::string exam_id;
    std::string test_id;
    std::int64_t window_open = 0;
    std::int64_t window_close = 0;
    std::vector<std::string> enrolled;
    std::set<std::string> dispatched;
    bool closed = false;
    std::string author;

    // Throws invalid_window or invalid_argument.
    void validate() const;
    Value to_value() const;
    static ExamSchedule from_value(const Value& v);
};

struct AssessmentRequest {
    RequestKind kind = RequestKind::pull_self_assessment;
    std::vector<std::string> students;
    SelfAssessmentConfig config;   // pull
    ExamSchedule schedule;         // push
    std::string session_id;        // pull: chosen by the student's PAA
    std::string conversation;
};

// What the SA does for one student: the engine to load into a fresh EA and
// where that EA goes.
struct DispatchPlan {
    std::string student;
    std::string session_id;
    std::string ea_name;
    std::string paa;
    std::string conversation;
    eval::AssessmentKind kind = eval::AssessmentKind::self_assessment;
    std::string exam_id;
    eval::EvaluationEngine engine;

    // Initial data of the EA agent.
    Value ea_init() const;
};

eval::QuestionBank load_bank(const store::DocumentStore& store);

// Compiles the engine(s) a request needs. Throws unknown_test, unknown_topic,
// invalid_argument or the compile errors of the evaluation engine.
std::vector<DispatchPlan> plan_dispatch(const AssessmentRequest& request, const store::DocumentStore& store,
                                        const eval::PolicyOverrides& defaults = {});

// Students of `schedule` still owed an EA at `now`. Throws window_not_open
// before the window, window_closed from window_close on.
std::vector<std::string> sa_open_exam_window(const ExamSchedule& schedule, std::int64_t now);

// One-line description used in transcripts.
std::string payload_summary(const Value& payload);

} // namespace agentest::sas
