#include "sas/protocol.hpp"

#include <algorithm>

#include "core/error.hpp"

namespace agentest::sas {

std::string student_paa(const std::string& student) { return "paa:" + student; }
std::string instructor_paa(const std::string& instructor) { return "ipa:" + instructor; }
std::string ui_sender(const std::string& user) { return "ui:" + user; }
std::string pull_ea(const std::string& session_id) { return "ea:" + session_id; }
std::string push_ea(const std::string& exam_id, const std::string& student) { return "ea:" + exam_id + ":" + student; }
std::string push_session(const std::string& exam_id, const std::string& student) { return exam_id + ":" + student; }

std::string role_of(const std::string& agent)
{
    if (agent == k_sa_name)
        return "sa";
    for (const char* p : {"paa", "ipa", "ea", "ui"})
        if (agent.starts_with(std::string(p) + ":"))
            return p;
    return "?";
}

// ---------------------------------------------------------------------------

Value SelfAssessmentConfig::to_value() const
{
    Value v = Value::map();
    if (!test_id.empty())
        v["test_id"] = test_id;
    if (!topic.empty())
        v["topic"] = topic;
    if (count)
        v["count"] = *count;
    if (start_difficulty)
        v["start_difficulty"] = *start_difficulty;
    return v;
}

SelfAssessmentConfig SelfAssessmentConfig::from_value(const Value& v)
{
    if (!v.is_map())
        fail(Errc::invalid_argument, "self-assessment config must be an object");
    SelfAssessmentConfig c;
    c.test_id = v.get_string("test_id");
    c.topic = v.get_string("topic");
    auto opt_int = [&](const char* key) -> std::optional<int> {
        auto* f = v.find(key);
        if (!f || f->is_null())
            return std::nullopt;
        if (!f->is_int())
            fail(Errc::invalid_argument, std::string("config field '") + key + "' must be an integer");
        return static_cast<int>(f->as_int());
    };
    c.count = opt_int("count");
    c.start_difficulty = opt_int("start_difficulty");
    if (c.test_id.empty() && c.topic.empty())
        fail(Errc::invalid_argument, "self-assessment config needs a test_id or a topic");
    if (c.count && *c.count < 1)
        fail(Errc::invalid_argument, "question count must be positive");
    if (c.start_difficulty && (*c.start_difficulty < 1 || *c.start_difficulty > 5))
        fail(Errc::invalid_argument, "start_difficulty must lie within [1,5]");
    return c;
}

void ExamSchedule::validate() const
{
    if (test_id.empty())
        fail(Errc::invalid_argument, "exam needs a test_id");
    if (window_close <= window_open)
        fail(Errc::invalid_window, "window_close (" + std::to_string(window_close) + ") must be after window_open (" +
                                       std::to_string(window_open) + ")");
    if (enrolled.empty())
        fail(Errc::invalid_argument, "exam needs at least one enrolled student");
    std::set<std::string> seen;
    for (const auto& s : enrolled)
        if (s.empty() || !seen.insert(s).second)
            fail(Errc::invalid_argument, "enrolled students must be non-empty and distinct");
}

Value ExamSchedule::to_value() const
{
    Value v = Value::map();
    v["exam_id"] = exam_id;
    v["test_id"] = test_id;
    v["window_open"] = window_open;
    v["window_close"] = window_close;
    Value e = Value::list();
    for (const auto& s : enrolled)
        e.push_back(s);
    v["enrolled"] = std::move(e);
    Value d = Value::list();
    for (const auto& s : dispatched)
        d.push_back(s);
    v["dispatched"] = std::move(d);
    v["closed"] = closed;
    v["author"] = author;
    return v;
}

ExamSchedule ExamSchedule::from_value(const Value& v)
{
    if (!v.is_map())
        fail(Errc::invalid_argument, "exam schedule must be an object");
    ExamSchedule s;
    s.exam_id = v.get_string("exam_id");
    s.test_id = v.get_string("test_id");
    for (const char* key : {"window_open", "window_close"}) {
        auto* f = v.find(key);
        if (!f || !f->is_int())
            fail(Errc::invalid_argument, std::string("exam field '") + key + "' must be an integer (ms)");
    }
    s.window_open = v.get_int("window_open");
    s.window_close = v.get_int("window_close");
    if (auto* e = v.find("enrolled"); e && e->is_list())
        for (const auto& x : e->as_list())
            s.enrolled.push_back(x.is_string() ? x.as_string() : std::string{});
    if (auto* d = v.find("dispatched"); d && d->is_list())
        for (const auto& x : d->as_list())
            s.dispatched.insert(x.as_string());
    s.closed = v.get_bool("closed");
    s.author = v.get_string("author");
    return s;
}

Value DispatchPlan::ea_init() const
{
    Value v = Value::map();
    v["session_id"] = session_id;
    v["student"] = student;
    v["paa"] = paa;
    v["sa"] = k_sa_name;
    v["kind"] = kind == eval::AssessmentKind::compulsory_exam ? "push" : "pull";
    v["exam_id"] = exam_id;
    v["conversation"] = conversation;
    v["engine"] = engine.to_value();
    v["session"] = eval::start_session(engine, session_id, student).to_value();
    return v;
}

// ---------------------------------------------------------------------------

eval::QuestionBank load_bank(const store::DocumentStore& store)
{
    eval::QuestionBank bank;
    for (const auto& e : store.list(store::EntityKind::question))
        bank.questions.emplace(e.id, eval::question_from_value(e.body));
    for (const auto& e : store.list(store::EntityKind::expert_answer))
        bank.answers.emplace(e.id, eval::expert_answer_from_value(e.body, e.id));
    return bank;
}

namespace {

eval::Test load_test(const store::DocumentStore& store, const std::string& test_id)
{
    auto e = store.find(store::EntityKind::test, test_id);
    if (!e)
        fail(Errc::unknown_test, "no test '" + test_id + "'");
    return eval::test_from_value(e->body);
}

} // namespace

std::vector<DispatchPlan> plan_dispatch(const AssessmentRequest& request, const store::DocumentStore& store,
                                        const eval::PolicyOverrides& defaults)
{
    std::vector<DispatchPlan> plans;
    eval::QuestionBank bank = load_bank(store);

    if (request.kind == RequestKind::pull_self_assessment) {
        if (request.students.size() != 1)
            fail(Errc::invalid_argument, "a self-assessment has exactly one student");
        if (request.session_id.empty())
            fail(Errc::invalid_argument, "a self-assessment needs a session id");
        const auto& cfg = request.config;
        eval::Test test;
        if (!cfg.test_id.empty()) {
            test = load_test(store, cfg.test_id);
            if (test.kind == eval::AssessmentKind::compulsory_exam)
                fail(Errc::refused, "test '" + test.id + "' is a compulsory exam and only runs on its schedule");
        } else {
            test.id = "self:" + cfg.topic;
            test.title = "Self-assessment: " + cfg.topic;
            test.kind = eval::AssessmentKind::self_assessment;
            for (const auto& [id, q] : bank.questions)
                if (q.topic == cfg.topic)
                    test.question_ids.push_back(id);
            if (test.question_ids.empty())
                fail(Errc::unknown_topic, "no questions on topic '" + cfg.topic + "'");
            test.max_questions = static_cast<int>(test.question_ids.size());
        }
        eval::PolicyOverrides o = defaults;
        if (cfg.count)
            o.max_questions = *cfg.count;
        if (cfg.start_difficulty)
            o.start_difficulty = *cfg.start_difficulty;
        if (o.max_questions)
            o.max_questions = std::min<int>(*o.max_questions, static_cast<int>(test.question_ids.size()));
        else
            o.max_questions = test.max_questions;

        DispatchPlan p;
        p.student = request.students.front();
        p.session_id = request.session_id;
        p.ea_name = pull_ea(p.session_id);
        p.paa = student_paa(p.student);
        p.conversation = request.conversation;
        p.kind = eval::AssessmentKind::self_assessment;
        p.engine = eval::compile_engine(test, bank, o, "engine:" + p.session_id);
        plans.push_back(std::move(p));
        return plans;
    }

    const ExamSchedule& s = request.schedule;
    eval::Test test = load_test(store, s.test_id);
    eval::PolicyOverrides o;
    o.start_difficulty = defaults.start_difficulty;
    eval::EvaluationEngine engine = eval::compile_engine(test, bank, o, "engine:" + s.exam_id);
    for (const auto& student : request.students) {
        DispatchPlan p;
        p.student = student;
        p.session_id = push_session(s.exam_id, student);
        p.ea_name = push_ea(s.exam_id, student);
        p.paa = student_paa(student);
        p.conversation = "exam:" + p.session_id;
        p.kind = eval::AssessmentKind::compulsory_exam;
        p.exam_id = s.exam_id;
        p.engine = engine;
        plans.push_back(std::move(p));
    }
    return plans;
}

std::vector<std::string> sa_open_exam_window(const ExamSchedule& schedule, std::int64_t now)
{
    if (now < schedule.window_open)
        fail(Errc::window_not_open, "exam '" + schedule.exam_id + "' opens at " + std::to_string(schedule.window_open));
    if (now >= schedule.window_close || schedule.closed)
        fail(Errc::window_closed, "exam '" + schedule.exam_id + "' closed at " + std::to_string(schedule.window_close));
    std::vector<std::string> out;
    for (const auto& s : schedule.enrolled)
        if (!schedule.dispatched.contains(s))
            out.push_back(s);
    return out;
}

std::string payload_summary(const Value& payload)
{
    std::string out;
    auto add = [&](const char* key) {
        auto* v = payload.find_path(key);
        if (!v || v->is_null())
            return;
        if (!out.empty())
            out += ' ';
        std::string leaf = key;
        leaf = leaf.substr(leaf.rfind('.') + 1);
        out += leaf + "=" + (v->is_string() ? v->as_string() : v->debug_string());
    };
    for (const char* k : {"session_id", "question.id", "question_id", "quit", "code", "result.grade", "status", "op"})
        add(k);
    return out;
}

} // namespace agentest::sas
