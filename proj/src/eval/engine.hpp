#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "eval/assessment.hpp"

namespace agentest::eval {

using TokenSet = std::set<std::string>;

// Words dropped by normalize_short_answer.
inline const std::set<std::string, std::less<>> k_stop_words{"a", "an", "the", "of", "s"};

// Lowercases ASCII letters, splits on Unicode whitespace and on every
// non-alphanumeric code point, then drops stop-words. Idempotent.
TokenSet normalize_short_answer(std::string_view text);

struct CompiledAnswer {
    std::string question_id;
    QuestionType type = QuestionType::single_choice;
    std::string option;
    std::set<std::string> options;
    double value = 0;
    double tolerance = 0;
    std::vector<std::string> phrases;
    std::vector<TokenSet> phrase_tokens;

    // The accepted answer in presentable form, used in result feedback.
    Value feedback() const;
};

// Difficulty ladder: step up after a score at or above the threshold,
// step down otherwise, clamped to [min, max].
struct AdaptivePolicy {
    int start_difficulty = 3;
    int step_up = 1;
    int step_down = -1;
    Rational threshold{1, 2};
    int min_difficulty = 1;
    int max_difficulty = 5;

    int next_difficulty(int current, const Rational& score) const;
    void validate() const;
};

struct PolicyOverrides {
    std::optional<int> start_difficulty;
    std::optional<int> max_questions;
};

// Portable assessment knowledge carried by an evaluation agent.
struct EvaluationEngine {
    std::string engine_id;
    std::string test_id;
    std::string title;
    AssessmentKind kind = AssessmentKind::self_assessment;
    int max_questions = 0;
    std::vector<std::string> order;
    std::map<std::string, Question> questions;
    std::map<std::string, CompiledAnswer> answers;
    AdaptivePolicy policy;

    const Question& question(std::string_view id) const;
    Value to_value() const;
    static EvaluationEngine from_value(const Value& v);
};

struct QuestionBank {
    std::map<std::string, Question> questions;
    std::map<std::string, ExpertAnswer> answers;
};

// Offline phase. Throws Error(missing_answer) naming the first question
// without an expert answer, Error(invalid_question) listing every invalid
// question, Error(unknown_question) for ids absent from the bank.
EvaluationEngine compile_engine(const Test& test, const QuestionBank& bank,
                                const PolicyOverrides& overrides = {}, std::string engine_id = {});

// Score in [0,1]. Throws unknown_question or type_mismatch.
Rational evaluate_answer(const EvaluationEngine& engine, std::string_view question_id, const Value& raw);

struct AskedQuestion {
    std::string question_id;
    Value answer;
    Rational score;
};

struct SessionRecord {
    std::string session_id;
    std::string student;
    std::string engine_id;
    std::vector<AskedQuestion> asked;
    int current_difficulty = 3;
    bool finished = false;
    std::optional<std::string> issued; // question shown but not yet answered

    bool was_asked(std::string_view question_id) const;
    Value to_value() const;
    static SessionRecord from_value(const Value& v);
};

SessionRecord start_session(const EvaluationEngine& engine, std::string session_id, std::string student);

// Question to show next, or nullopt when the session is done (max reached or
// pool exhausted). Returns the issued question again while it is unanswered.
std::optional<Question> next_question(const EvaluationEngine& engine, const SessionRecord& session);

// Marks the next question as issued, or finishes the session when there is none.
std::optional<Question> issue_next(const EvaluationEngine& engine, SessionRecord& session);

// True when another question would be issued after the current state.
bool has_more(const EvaluationEngine& engine, const SessionRecord& session);

// Online phase for one answer. Throws duplicate_answer, out_of_order,
// session_mismatch, unknown_question or type_mismatch.
SessionRecord record_answer(const EvaluationEngine& engine, SessionRecord session,
                            std::string_view question_id, const Value& raw);

// Ends the session early, keeping what was answered.
void finish_session(SessionRecord& session);

struct QuestionScore {
    std::string question_id;
    Rational weight;
    Rational score;
    Value answer;
    Value correct;
};

struct TestResult {
    std::string session_id;
    std::string student;
    std::string engine_id;
    std::string test_id;
    int grade = 0;
    std::vector<QuestionScore> scores;
    std::int64_t timestamp_ms = 0;

    Value to_value() const;
    static TestResult from_value(const Value& v);
};

// grade = round(100 * sum(w*s) / sum(w)) over answered questions, halves away
// from zero; 0 when nothing was answered. Throws unfinished_session.
TestResult grade_session(const EvaluationEngine& engine, const SessionRecord& session, std::int64_t timestamp_ms = 0);

} // namespace agentest::eval
