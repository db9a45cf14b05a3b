#include "eval/assessment.hpp"

#include <cmath>

#include "core/error.hpp"

namespace agentest::eval {

std::string_view to_string(QuestionType t)
{
    switch (t) {
    case QuestionType::single_choice: return "single_choice";
    case QuestionType::multi_choice: return "multi_choice";
    case QuestionType::numeric: return "numeric";
    case QuestionType::short_answer: return "short_answer";
    }
    return "?";
}

QuestionType question_type_from(std::string_view s)
{
    if (s == "single_choice") return QuestionType::single_choice;
    if (s == "multi_choice") return QuestionType::multi_choice;
    if (s == "numeric") return QuestionType::numeric;
    if (s == "short_answer") return QuestionType::short_answer;
    fail(Errc::schema_error, "unknown question type '" + std::string(s) + "'");
}

std::string_view to_string(AssessmentKind k)
{
    return k == AssessmentKind::compulsory_exam ? "compulsory_exam" : "self_assessment";
}

AssessmentKind assessment_kind_from(std::string_view s)
{
    if (s == "compulsory_exam") return AssessmentKind::compulsory_exam;
    if (s == "self_assessment") return AssessmentKind::self_assessment;
    fail(Errc::schema_error, "unknown assessment kind '" + std::string(s) + "'");
}

bool Question::has_option(std::string_view option_id) const
{
    for (const auto& o : options)
        if (o.id == option_id)
            return true;
    return false;
}

std::vector<std::string> validate_question(const Question& q, const ExpertAnswer* a)
{
    std::vector<std::string> issues;
    auto add = [&](const std::string& s) { issues.push_back(q.id + ": " + s); };
    if (q.id.empty())
        issues.push_back("question without an id");
    if (q.difficulty < 1 || q.difficulty > 5)
        add("difficulty " + std::to_string(q.difficulty) + " outside [1,5]");
    if (q.weight <= Rational(0))
        add("weight must be positive");
    if (q.is_choice()) {
        if (q.options.size() < 2)
            add("choice questions need at least 2 options");
        std::set<std::string> ids;
        for (const auto& o : q.options)
            if (o.id.empty() || !ids.insert(o.id).second)
                add("option ids must be non-empty and unique");
    }
    if (!a)
        return issues;
    switch (q.type) {
    case QuestionType::single_choice:
        if (!q.has_option(a->option))
            add("accepted option '" + a->option + "' is not an option of the question");
        break;
    case QuestionType::multi_choice:
        if (a->options.empty())
            add("multi_choice answer accepts no option");
        for (const auto& o : a->options)
            if (!q.has_option(o))
                add("accepted option '" + o + "' is not an option of the question");
        break;
    case QuestionType::numeric:
        if (!std::isfinite(a->value) || !std::isfinite(a->tolerance))
            add("numeric answer must be finite");
        if (a->tolerance < 0)
            add("numeric tolerance must be >= 0");
        break;
    case QuestionType::short_answer:
        if (a->phrases.empty())
            add("short_answer needs at least one accepted phrase");
        break;
    }
    return issues;
}

std::vector<std::string> validate_test(const Test& t)
{
    std::vector<std::string> issues;
    if (t.id.empty())
        issues.push_back("test without an id");
    if (t.question_ids.empty())
        issues.push_back(t.id + ": test has no questions");
    std::set<std::string> seen;
    for (const auto& q : t.question_ids)
        if (!seen.insert(q).second)
            issues.push_back(t.id + ": question '" + q + "' listed twice");
    if (t.max_questions < 1 || static_cast<std::size_t>(t.max_questions) > t.question_ids.size())
        issues.push_back(t.id + ": max_questions must be in [1, number of questions]");
    return issues;
}

// ---------------------------------------------------------------------------

Value rational_to_value(const Rational& r)
{
    if (r.den() == 1)
        return r.num();
    return r.to_string();
}

Rational rational_from_value(const Value& v)
{
    if (v.is_int()) return Rational(v.as_int());
    if (v.is_string()) return Rational::parse(v.as_string());
    if (v.is_real()) return Rational::from_double(v.as_number());
    fail(Errc::schema_error, std::string("expected a number, got ") + kind_name(v.kind()));
}

Rational weight_from_value(const Value* v)
{
    if (!v || v->is_null())
        return Rational(1);
    return rational_from_value(*v);
}

namespace {

const Value& require(const Value& v, std::string_view key, const std::string& ctx)
{
    auto* f = v.find(key);
    if (!f)
        fail(Errc::schema_error, ctx + ": missing field '" + std::string(key) + "'");
    return *f;
}

std::string require_string(const Value& v, std::string_view key, const std::string& ctx)
{
    const auto& f = require(v, key, ctx);
    if (!f.is_string())
        fail(Errc::schema_error, ctx + ": field '" + std::string(key) + "' must be a string");
    return f.as_string();
}

std::int64_t require_int(const Value& v, std::string_view key, const std::string& ctx)
{
    const auto& f = require(v, key, ctx);
    if (!f.is_int())
        fail(Errc::schema_error, ctx + ": field '" + std::string(key) + "' must be an integer");
    return f.as_int();
}

std::vector<std::string> string_list(const Value& v, std::string_view key, const std::string& ctx)
{
    std::vector<std::string> out;
    const auto& f = require(v, key, ctx);
    if (!f.is_list())
        fail(Errc::schema_error, ctx + ": field '" + std::string(key) + "' must be a list");
    for (const auto& s : f.as_list()) {
        if (!s.is_string())
            fail(Errc::schema_error, ctx + ": field '" + std::string(key) + "' must hold strings");
        out.push_back(s.as_string());
    }
    return out;
}

} // namespace

Value to_value(const Question& q)
{
    Value v = Value::map();
    v["id"] = q.id;
    v["text"] = q.text;
    v["type"] = std::string(to_string(q.type));
    v["difficulty"] = q.difficulty;
    v["weight"] = rational_to_value(q.weight);
    v["topic"] = q.topic;
    if (q.is_choice()) {
        Value opts = Value::list();
        for (const auto& o : q.options) {
            Value ov = Value::map();
            ov["id"] = o.id;
            ov["text"] = o.text;
            opts.push_back(std::move(ov));
        }
        v["options"] = std::move(opts);
    }
    return v;
}

Question question_from_value(const Value& v)
{
    Question q;
    q.id = require_string(v, "id", "question");
    std::string ctx = "question '" + q.id + "'";
    q.text = require_string(v, "text", ctx);
    q.type = question_type_from(require_string(v, "type", ctx));
    q.difficulty = static_cast<int>(require_int(v, "difficulty", ctx));
    q.weight = weight_from_value(v.find("weight"));
    q.topic = v.get_string("topic");
    if (auto* opts = v.find("options")) {
        if (!opts->is_list())
            fail(Errc::schema_error, ctx + ": field 'options' must be a list");
        for (const auto& o : opts->as_list())
            q.options.push_back({require_string(o, "id", ctx + " option"), o.get_string("text")});
    }
    return q;
}

Value to_value(const ExpertAnswer& a)
{
    Value v = Value::map();
    v["question_id"] = a.question_id;
    if (!a.option.empty())
        v["option"] = a.option;
    if (!a.options.empty()) {
        Value l = Value::list();
        for (const auto& o : a.options)
            l.push_back(o);
        v["options"] = std::move(l);
    }
    if (!a.phrases.empty()) {
        Value l = Value::list();
        for (const auto& p : a.phrases)
            l.push_back(p);
        v["phrases"] = std::move(l);
    }
    if (a.value != 0 || a.tolerance != 0 || (!v.contains("option") && !v.contains("options") && !v.contains("phrases"))) {
        v["value"] = a.value;
        v["tolerance"] = a.tolerance;
    }
    return v;
}

ExpertAnswer expert_answer_from_value(const Value& v, std::string question_id)
{
    ExpertAnswer a;
    a.question_id = question_id.empty() ? v.get_string("question_id") : std::move(question_id);
    std::string ctx = "answer for '" + a.question_id + "'";
    if (auto* o = v.find("option")) {
        if (!o->is_string())
            fail(Errc::schema_error, ctx + ": field 'option' must be a string");
        a.option = o->as_string();
    }
    if (v.contains("options")) {
        auto l = string_list(v, "options", ctx);
        a.options.insert(l.begin(), l.end());
    }
    if (v.contains("phrases"))
        a.phrases = string_list(v, "phrases", ctx);
    if (auto* x = v.find("value")) {
        if (!x->is_number())
            fail(Errc::schema_error, ctx + ": field 'value' must be a number");
        a.value = x->as_number();
    }
    if (auto* t = v.find("tolerance")) {
        if (!t->is_number())
            fail(Errc::schema_error, ctx + ": field 'tolerance' must be a number");
        a.tolerance = t->as_number();
    }
    return a;
}

Value to_value(const Test& t)
{
    Value v = Value::map();
    v["id"] = t.id;
    v["title"] = t.title;
    v["kind"] = std::string(to_string(t.kind));
    Value ids = Value::list();
    for (const auto& q : t.question_ids)
        ids.push_back(q);
    v["questions"] = std::move(ids);
    v["max_questions"] = t.max_questions;
    v["author"] = t.author;
    return v;
}

Test test_from_value(const Value& v)
{
    Test t;
    t.id = require_string(v, "id", "test");
    std::string ctx = "test '" + t.id + "'";
    t.title = v.get_string("title");
    t.kind = assessment_kind_from(require_string(v, "kind", ctx));
    t.question_ids = string_list(v, "questions", ctx);
    auto* mq = v.find("max_questions");
    if (mq && !mq->is_int())
        fail(Errc::schema_error, ctx + ": field 'max_questions' must be an integer");
    t.max_questions = mq ? static_cast<int>(mq->as_int()) : static_cast<int>(t.question_ids.size());
    t.author = v.get_string("author");
    return t;
}

} // namespace agentest::eval
