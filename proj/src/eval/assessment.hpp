#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "core/rational.hpp"
#include "core/value.hpp"

namespace agentest::eval {

enum class QuestionType { single_choice, multi_choice, numeric, short_answer };
enum class AssessmentKind { compulsory_exam, self_assessment };

std::string_view to_string(QuestionType t);
QuestionType question_type_from(std::string_view s);
std::string_view to_string(AssessmentKind k);
AssessmentKind assessment_kind_from(std::string_view s);

struct Option {
    std::string id;
    std::string text;
};

struct Question {
    std::string id;
    std::string text;
    QuestionType type = QuestionType::single_choice;
    std::vector<Option> options;
    int difficulty = 3;
    Rational weight{1};
    std::string topic;

    bool is_choice() const { return type == QuestionType::single_choice || type == QuestionType::multi_choice; }
    bool has_option(std::string_view option_id) const;
};

// Accepted answer(s) for one question. Which fields matter depends on the
// question type: `option` (single), `options` (multi), `value`/`tolerance`
// (numeric), `phrases` (short answer).
struct ExpertAnswer {
    std::string question_id;
    std::string option;
    std::set<std::string> options;
    double value = 0;
    double tolerance = 0;
    std::vector<std::string> phrases;
};

struct Test {
    std::string id;
    std::string title;
    AssessmentKind kind = AssessmentKind::self_assessment;
    std::vector<std::string> question_ids;
    int max_questions = 0;
    std::string author;
};

// Per-id problems with a question/answer pair; empty when valid.
std::vector<std::string> validate_question(const Question& q, const ExpertAnswer* answer);
std::vector<std::string> validate_test(const Test& t);

Value to_value(const Question& q);
Value to_value(const ExpertAnswer& a);
Value to_value(const Test& t);
Question question_from_value(const Value& v);
ExpertAnswer expert_answer_from_value(const Value& v, std::string question_id = {});
Test test_from_value(const Value& v);

// Weight literals: integers, "p/q" strings or decimals. Missing means 1.
Rational weight_from_value(const Value* v);
Value rational_to_value(const Rational& r);
Rational rational_from_value(const Value& v);

} // namespace agentest::eval
