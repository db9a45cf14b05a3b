#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sas/deployment.hpp"

namespace agentest::sim {

// One scripted answer: a raw value, a quit, or "answer correctly / wrongly"
// (the harness derives the value from the bank's expert answer).
struct AnswerStep {
    enum class Kind { raw, quit, correct, wrong };
    Kind kind = Kind::raw;
    Value raw;

    static AnswerStep from_value(const Value& v);
};

struct PullActor {
    std::string student;
    Value config = Value::map();
    std::vector<AnswerStep> answers; // exhausted script -> quit
    std::int64_t at_ms = 0;
    std::int64_t think_ms = 0;
};

struct PushExam {
    std::string instructor;
    std::string test_id;
    std::int64_t window_open = 0;
    std::int64_t window_close = 0;
    // null script: the student never answers. Exhausted script: waits for close.
    std::map<std::string, std::optional<std::vector<AnswerStep>>> scripts;
    std::int64_t think_ms = 0;
};

struct Fault {
    std::string kill_container;
    std::optional<std::int64_t> at_ms;
    std::optional<std::size_t> after_answers;
    std::string drop_label;
    int drop_count = 0;
};

struct Scenario {
    std::string name;
    sas::DeploymentConfig deployment; // store and spool are set per run
    std::int64_t max_time_ms = 600000;
    std::vector<PullActor> pulls;
    std::vector<PushExam> pushes;
    std::vector<Fault> faults;
    Value expect = Value::map();

    // Throws parse_error / invalid_argument (actor naming an unknown student, ...).
    static Scenario from_json(const nlohmann::json& doc, const std::filesystem::path& base);
    static Scenario load(const std::filesystem::path& file);
};

} // namespace agentest::sim
