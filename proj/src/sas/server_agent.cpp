#include "core/log.hpp"
#include "runtime/container.hpp"
#include "sas/agents.hpp"
#include "sas/models.hpp"

namespace agentest::sas {

using behavior::ActivityCall;
using runtime::AgentContext;
using runtime::context_of;
using store::DocumentStore;
using store::EntityKind;

namespace {

DocumentStore& store_of(AgentContext& ctx)
{
    auto* s = ctx.resource<DocumentStore>(k_store_resource);
    if (!s)
        fail(Errc::internal, "container '" + ctx.container().id() + "' has no document store");
    return *s;
}

SasSettings settings_of(AgentContext& ctx)
{
    auto* s = ctx.resource<SasSettings>(k_settings_resource);
    return s ? *s : SasSettings{};
}

std::string user_of(const std::string& agent)
{
    auto p = agent.find(':');
    return p == std::string::npos ? agent : agent.substr(p + 1);
}

Value ok_reply()
{
    Value v = Value::map();
    v["ok"] = true;
    return v;
}

// Spawns the EA here and moves it next to the student's PAA. The EA is gone
// again when this throws.
void send_ea(AgentContext& ctx, const std::string& ea, const std::string& paa, Value init)
{
    ctx.spawn(k_ea_behavior, std::move(init), ea);
    try {
        auto where = ctx.locate(paa);
        if (!where)
            fail(Errc::unknown_receiver, "no agent '" + paa + "' to send an evaluation agent to");
        if (*where != ctx.container().id())
            ctx.migrate(ea, *where);
    } catch (...) {
        try {
            ctx.container().terminate(ea);
        } catch (const Error&) {
        }
        throw;
    }
}

void save_schedule(DocumentStore& store, const ExamSchedule& s)
{
    auto cur = store.get(EntityKind::schedule, s.exam_id);
    store.put({EntityKind::schedule, s.exam_id, cur.version, s.to_value()});
}

Value arm_poll(const ActivityCall& call)
{
    auto& ctx = context_of(call);
    auto ms = settings_of(ctx).poll_ms;
    ctx.schedule(ms, "serve", {"poll", Value::map()});
    Value v = Value::map();
    v["due_ms"] = ctx.clock().now_ms() + ms;
    return v;
}

Value plan_pull(const ActivityCall& call)
{
    auto& ctx = context_of(call);
    const Value& ev = call.args[0];
    Value out = Value::map();
    out["session_id"] = ev.get_string("session_id");
    try {
        std::string sender = ev.get_string("_sender");
        if (role_of(sender) != "paa")
            fail(Errc::forbidden, "only a student's assistant may request a self-assessment");
        std::string student = user_of(sender);
        Value& live = ctx.data()["pull_live"];
        if (auto* ea = live.find(student); ea && ea->is_string() && ctx.locate(ea->as_string()))
            fail(Errc::live_session_exists, "student '" + student + "' already has a live self-assessment");

        AssessmentRequest req;
        req.kind = RequestKind::pull_self_assessment;
        req.students = {student};
        req.session_id = ev.get_string("session_id");
        req.conversation = ev.get_string("_conversation");
        const Value* cfg = ev.find("config");
        req.config = SelfAssessmentConfig::from_value(cfg ? *cfg : Value{});
        auto plans = plan_dispatch(req, store_of(ctx), settings_of(ctx).defaults);
        const auto& p = plans.front();

        Value pending = Value::map();
        pending["init"] = p.ea_init();
        pending["ea"] = p.ea_name;
        pending["paa"] = p.paa;
        pending["student"] = student;
        ctx.data()["pending"][p.session_id] = std::move(pending);

        Value agree = Value::map();
        agree["session_id"] = p.session_id;
        agree["ea"] = p.ea_name;
        agree["test_id"] = p.engine.test_id;
        agree["title"] = p.engine.title;
        agree["max_questions"] = p.engine.max_questions;
        out["ok"] = true;
        out["agree"] = std::move(agree);
    } catch (const Error& e) {
        Value r = error_reply(e);
        r["session_id"] = out.get_string("session_id");
        return r;
    }
    return out;
}

Value dispatch_pull(const ActivityCall& call)
{
    auto& ctx = context_of(call);
    std::string sid = call.args[0].get_string("session_id");
    Value out = Value::map();
    out["session_id"] = sid;
    Value& pending_all = ctx.data()["pending"];
    auto* pending = pending_all.find(sid);
    try {
        if (!pending)
            fail(Errc::internal, "no plan for session '" + sid + "'");
        Value p = *pending;
        pending_all.as_map().erase(sid);

        std::string ea = p.get_string("ea");
        send_ea(ctx, ea, p.get_string("paa"), *p.find("init"));
        ctx.data()["pull_live"][p.get_string("student")] = ea;
        out["ok"] = true;
        out["ea"] = ea;
    } catch (const Error& e) {
        log().warn("sa: dispatch of session '{}' failed: {}", sid, e.what());
        Value r = error_reply(e);
        r["session_id"] = sid;
        return r;
    }
    return out;
}

Value record_result(const ActivityCall& call)
{
    auto& ctx = context_of(call);
    const Value& ev = call.args[0];
    Value out = Value::map();
    out["inform"] = false;
    if (role_of(ev.get_string("_sender")) != "ea" || ev.get_string("kind") != "push")
        return out;
    std::string sid = ev.get_string("session_id");
    const Value* result = ev.find("result");
    if (sid.empty() || !result)
        return out;
    try {
        auto& store = store_of(ctx);
        if (!store.find(EntityKind::result, sid))
            store.put({EntityKind::result, sid, 0, *result});
    } catch (const Error& e) {
        log().error("sa: could not store result '{}': {}", sid, e.what());
        return out;
    }
    Value payload = Value::map();
    payload["session_id"] = sid;
    payload["exam_id"] = ev.get_string("exam_id");
    payload["result"] = *result;
    out["inform"] = true;
    out["paa"] = student_paa(ev.get_string("student"));
    out["payload"] = std::move(payload);
    return out;
}

// --- tests ------------------------------------------------------------------

struct Actor {
    std::string user;
    std::string role;
    bool staff() const { return role == "instructor" || role == "admin"; }
};

Actor actor_of(const Value& ev)
{
    std::string sender = ev.get_string("_sender");
    auto r = role_of(sender);
    if (r != "paa" && r != "ipa")
        fail(Errc::forbidden, "'" + sender + "' is not a personal assistant");
    Actor a{user_of(sender), ev.get_string("role")};
    if (r == "paa")
        a.role = "student";
    else if (a.role != "admin")
        a.role = "instructor";
    return a;
}

eval::Test checked_test(DocumentStore& store, const Value& body)
{
    eval::Test t = eval::test_from_value(body);
    store::check_entity_id(t.id);
    auto issues = eval::validate_test(t);
    if (!issues.empty()) {
        std::string all;
        for (const auto& i : issues)
            all += (all.empty() ? "" : "; ") + i;
        fail(Errc::invalid_argument, all);
    }
    eval::compile_engine(t, load_bank(store));
    return t;
}

Value entity_value(const store::Entity& e)
{
    Value v = Value::map();
    v["id"] = e.id;
    v["version"] = e.version;
    v["body"] = e.body;
    return v;
}

void require_owner(const Actor& a, const store::Entity& e)
{
    if (a.role != "admin" && e.body.get_string("author") != a.user)
        fail(Errc::forbidden, "test '" + e.id + "' belongs to '" + e.body.get_string("author") + "'");
}

Value tests_op(const ActivityCall& call)
{
    auto& ctx = context_of(call);
    const Value& ev = call.args[0];
    try {
        auto& store = store_of(ctx);
        Actor a = actor_of(ev);
        std::string op = ev.get_string("op");
        Value out = ok_reply();
        if (op == "list") {
            Value l = Value::list();
            for (const auto& e : store.list(EntityKind::test))
                if (a.staff() || e.body.get_string("kind") == "self_assessment")
                    l.push_back(entity_value(e));
            out["tests"] = std::move(l);
            return out;
        }
        if (op == "get") {
            auto e = store.get(EntityKind::test, ev.get_string("id"));
            if (!a.staff() && e.body.get_string("kind") != "self_assessment")
                fail(Errc::not_found, "no test '" + e.id + "'");
            out["test"] = entity_value(e);
            return out;
        }
        if (!a.staff())
            fail(Errc::forbidden, "students cannot change tests");
        if (op == "create") {
            const Value* body = ev.find("test");
            Value b = body ? *body : Value{};
            if (!b.is_map())
                fail(Errc::invalid_argument, "test body must be an object");
            b["author"] = a.user;
            eval::Test t = checked_test(store, b);
            Value stored = eval::to_value(t);
            out["id"] = t.id;
            out["version"] = store.put({EntityKind::test, t.id, 0, stored});
            return out;
        }
        if (op == "update") {
            std::string id = ev.get_string("id");
            auto cur = store.get(EntityKind::test, id);
            require_owner(a, cur);
            const Value* body = ev.find("test");
            Value b = body ? *body : Value{};
            if (!b.is_map())
                fail(Errc::invalid_argument, "test body must be an object");
            b["id"] = id;
            b["author"] = cur.body.get_string("author");
            eval::Test t = checked_test(store, b);
            out["id"] = id;
            out["version"] = store.put({EntityKind::test, id, ev.get_int("version"), eval::to_value(t)});
            return out;
        }
        if (op == "delete") {
            std::string id = ev.get_string("id");
            require_owner(a, store.get(EntityKind::test, id));
            store.remove(EntityKind::test, id);
            out["id"] = id;
            return out;
        }
        fail(Errc::invalid_argument, "unknown tests operation '" + op + "'");
    } catch (const store::VersionConflict& e) {
        Value r = error_reply(e);
        r["current"] = e.current();
        return r;
    } catch (const Error& e) {
        return error_reply(e);
    }
}

// --- exams ------------------------------------------------------------------

std::string next_exam_id(DocumentStore& store)
{
    auto n = store.count(EntityKind::schedule);
    std::string id;
    do
        id = "exam-" + std::to_string(++n);
    while (store.find(EntityKind::schedule, id));
    return id;
}

Value schedule_op(const ActivityCall& call)
{
    auto& ctx = context_of(call);
    const Value& ev = call.args[0];
    try {
        auto& store = store_of(ctx);
        Actor a = actor_of(ev);
        if (!a.staff())
            fail(Errc::forbidden, "only instructors schedule exams");
        std::string op = ev.get_string("op");
        Value out = ok_reply();
        if (op == "create") {
            const Value* body = ev.find("schedule");
            ExamSchedule s = ExamSchedule::from_value(body ? *body : Value{});
            s.author = a.user;
            s.dispatched.clear();
            s.closed = false;
            s.validate();
            if (s.window_close <= ctx.clock().now_ms())
                fail(Errc::invalid_window, "window_close lies in the past");
            auto test = store.find(EntityKind::test, s.test_id);
            if (!test)
                fail(Errc::unknown_test, "no test '" + s.test_id + "'");
            if (test->body.get_string("kind") != "compulsory_exam")
                fail(Errc::invalid_argument, "test '" + s.test_id + "' is not a compulsory exam");
            if (store.count(EntityKind::user) > 0)
                for (const auto& st : s.enrolled) {
                    auto u = store.find(EntityKind::user, st);
                    if (!u || u->body.get_string("role") != "student")
                        fail(Errc::invalid_argument, "'" + st + "' is not a known student");
                }
            eval::compile_engine(eval::test_from_value(test->body), load_bank(store));
            s.exam_id = next_exam_id(store);
            store.put({EntityKind::schedule, s.exam_id, 0, s.to_value()});
            out["exam_id"] = s.exam_id;
            out["schedule"] = s.to_value();
            return out;
        }
        if (op == "list") {
            Value l = Value::list();
            for (const auto& e : store.list(EntityKind::schedule))
                if (a.role == "admin" || e.body.get_string("author") == a.user)
                    l.push_back(e.body);
            out["exams"] = std::move(l);
            return out;
        }
        fail(Errc::invalid_argument, "unknown schedule operation '" + op + "'");
    } catch (const Error& e) {
        return error_reply(e);
    }
}

void dispatch_exam(AgentContext& ctx, DocumentStore& store, ExamSchedule& s, std::int64_t now)
{
    auto owed = sa_open_exam_window(s, now);
    if (owed.empty())
        return;
    AssessmentRequest req;
    req.kind = RequestKind::push_exam;
    req.schedule = s;
    req.students = owed;
    auto plans = plan_dispatch(req, store, settings_of(ctx).defaults);
    bool changed = false;
    for (const auto& p : plans) {
        if (ctx.locate(p.ea_name)) {
            s.dispatched.insert(p.student);
            changed = true;
            continue;
        }
        if (!ctx.locate(p.paa))
            continue; // student offline; retried on the next poll
        try {
            send_ea(ctx, p.ea_name, p.paa, p.ea_init());
            s.dispatched.insert(p.student);
            changed = true;
        } catch (const Error& e) {
            log().warn("sa: exam '{}': no EA for '{}' yet: {}", s.exam_id, p.student, e.what());
        }
    }
    if (changed)
        save_schedule(store, s);
}

void close_exam(AgentContext& ctx, DocumentStore& store, ExamSchedule& s, std::int64_t now)
{
    for (const auto& student : s.enrolled) {
        std::string sid = push_session(s.exam_id, student);
        std::string conv = "exam:" + sid;
        if (s.dispatched.contains(student)) {
            std::string ea = push_ea(s.exam_id, student);
            if (!ctx.locate(ea))
                continue;
            runtime::Message m;
            m.receiver = ea;
            m.performative = runtime::Performative::request;
            m.conversation = conv;
            m.payload["type"] = "close";
            m.payload["session_id"] = sid;
            ctx.send(m);
            continue;
        }
        if (store.find(EntityKind::result, sid))
            continue;
        eval::TestResult r;
        r.session_id = sid;
        r.student = student;
        r.engine_id = "engine:" + s.exam_id;
        r.test_id = s.test_id;
        r.timestamp_ms = now;
        Value body = result_body(r, "absent", "push", s.exam_id);
        store.put({EntityKind::result, sid, 0, body});
        runtime::Message m;
        m.receiver = student_paa(student);
        m.performative = runtime::Performative::inform;
        m.conversation = conv;
        m.payload["type"] = "inform";
        m.payload["session_id"] = sid;
        m.payload["exam_id"] = s.exam_id;
        m.payload["result"] = body;
        if (ctx.locate(m.receiver))
            ctx.send(m);
    }
    s.closed = true;
    save_schedule(store, s);
}

Value poll_exams(const ActivityCall& call)
{
    auto& ctx = context_of(call);
    Value out = arm_poll(call);
    std::int64_t now = ctx.clock().now_ms();
    std::int64_t active = 0;
    try {
        auto& store = store_of(ctx);
        for (const auto& e : store.list(EntityKind::schedule)) {
            ExamSchedule s = ExamSchedule::from_value(e.body);
            if (s.closed || now < s.window_open)
                continue;
            ++active;
            try {
                if (now >= s.window_close)
                    close_exam(ctx, store, s, now);
                else
                    dispatch_exam(ctx, store, s, now);
            } catch (const Error& err) {
                log().warn("sa: exam '{}': {}", s.exam_id, err.what());
            }
        }
    } catch (const Error& err) {
        log().error("sa: exam poll failed: {}", err.what());
    }
    out["active"] = active;
    return out;
}

} // namespace

runtime::Behavior server_agent_behavior()
{
    auto reg = std::make_shared<behavior::ActivityRegistry>();
    reg->add("arm_poll", arm_poll);
    reg->add("plan_pull", plan_pull);
    reg->add("dispatch_pull", dispatch_pull);
    reg->add("record_result", record_result);
    reg->add("tests_op", tests_op);
    reg->add("schedule_op", schedule_op);
    reg->add("poll_exams", poll_exams);
    runtime::Behavior b;
    b.id = k_sa_behavior;
    b.tasks.push_back(behavior::validate_model(sa_task_model()));
    b.activities = std::move(reg);
    return b;
}

} // namespace agentest::sas
