#include <filesystem>

#include "core/log.hpp"
#include "runtime/container.hpp"
#include "sas/agents.hpp"
#include "sas/models.hpp"
#include "sas/spool.hpp"

namespace agentest::sas {

using behavior::ActivityCall;
using runtime::AgentContext;
using runtime::context_of;

namespace {

struct Loaded {
    eval::EvaluationEngine engine;
    eval::SessionRecord session;
};

Loaded load(AgentContext& ctx)
{
    const Value& d = ctx.data();
    return {eval::EvaluationEngine::from_value(*d.find("engine")), eval::SessionRecord::from_value(*d.find("session"))};
}

Value question_view(AgentContext& ctx, const Loaded& l, const eval::Question& q)
{
    Value v = Value::map();
    v["session_id"] = l.session.session_id;
    v["kind"] = ctx.data().get_string("kind");
    v["exam_id"] = ctx.data().get_string("exam_id");
    v["title"] = l.engine.title;
    v["question"] = eval::to_value(q);
    v["index"] = static_cast<std::int64_t>(l.session.asked.size() + 1);
    v["max"] = l.engine.max_questions;
    return v;
}

Value arrive(const ActivityCall& call)
{
    auto& ctx = context_of(call);
    Value& d = ctx.data();
    d["arrived_at"] = ctx.container().id();
    Value ea = Value::map();
    for (const char* k : {"session_id", "student", "paa", "sa", "kind", "exam_id", "conversation"})
        ea[k] = d.get_string(k);
    return ea;
}

Value greet(const ActivityCall& call)
{
    auto& ctx = context_of(call);
    Value out = Value::map();
    out["ok"] = ctx.container().resident(ctx.data().get_string("paa"));
    out["container"] = ctx.container().id();
    return out;
}

Value ask(const ActivityCall& call)
{
    auto& ctx = context_of(call);
    Loaded l = load(ctx);
    Value out = Value::map();
    auto q = eval::issue_next(l.engine, l.session);
    ctx.data()["session"] = l.session.to_value();
    out["ok"] = q.has_value();
    if (q)
        out["view"] = question_view(ctx, l, *q);
    return out;
}

Value record(const ActivityCall& call)
{
    auto& ctx = context_of(call);
    const Value& ev = call.args[0];
    Loaded l = load(ctx);
    Value out = Value::map();
    try {
        if (ev.get_string("_sender") != ctx.data().get_string("paa"))
            fail(Errc::session_mismatch, "answers come from '" + ctx.data().get_string("paa") + "' only");
        if (auto sid = ev.get_string("session_id"); !sid.empty() && sid != l.session.session_id)
            fail(Errc::session_mismatch, "answer for session '" + sid + "' reached '" + l.session.session_id + "'");
        std::string qid = ev.get_string("question_id", l.session.issued.value_or(""));
        const Value* raw = ev.find("answer");
        l.session = eval::record_answer(l.engine, l.session, qid, raw ? *raw : Value{});
        ctx.data()["session"] = l.session.to_value();
        out["ok"] = true;
        out["more"] = eval::has_more(l.engine, l.session);
    } catch (const Error& e) {
        out["ok"] = false;
        out["more"] = true;
        if (l.session.issued) {
            Value view = question_view(ctx, l, l.engine.question(*l.session.issued));
            view["error"] = error_reply(e);
            out["view"] = std::move(view);
        }
    }
    return out;
}

Value grade(const ActivityCall& call)
{
    auto& ctx = context_of(call);
    const Value& ev = call.args[0];
    const Value& greeting = call.args[1];
    Loaded l = load(ctx);
    eval::finish_session(l.session);
    ctx.data()["session"] = l.session.to_value();

    std::string status = "completed";
    if (ev.get_string("_event") == "close")
        status = l.session.asked.empty() ? "absent" : "closed";
    else if (ev.get_bool("quit"))
        status = "quit";
    else if (greeting.is_map() && !greeting.get_bool("ok"))
        status = "unreachable";

    auto r = eval::grade_session(l.engine, l.session, ctx.clock().now_ms());
    Value body = result_body(r, status, ctx.data().get_string("kind"), ctx.data().get_string("exam_id"));
    body["title"] = l.engine.title;
    body["max"] = l.engine.max_questions;
    ctx.data()["result"] = body;
    Value out = Value::map();
    out["status"] = status;
    out["grade"] = r.grade;
    return out;
}

Value report(const ActivityCall& call)
{
    auto& ctx = context_of(call);
    const Value& d = ctx.data();
    Value payload = Value::map();
    payload["session_id"] = d.get_string("session_id");
    payload["exam_id"] = d.get_string("exam_id");
    payload["student"] = d.get_string("student");
    payload["kind"] = d.get_string("kind");
    payload["result"] = *d.find("result");
    Value out = Value::map();
    out["payload"] = payload;
    if (d.get_string("kind") != "push")
        return out;

    runtime::Message m;
    m.receiver = d.get_string("sa");
    m.performative = runtime::Performative::inform;
    m.conversation = d.get_string("conversation");
    m.payload = payload;
    m.payload["type"] = "result";
    try {
        ctx.send_now(m);
        out["spooled"] = false;
        return out;
    } catch (const Error& e) {
        log().warn("{}: result for '{}' not delivered ({}); spooling", ctx.self(), d.get_string("session_id"), e.what());
    }
    auto* dir = ctx.resource<std::filesystem::path>(k_spool_resource);
    std::filesystem::path where = dir ? *dir : std::filesystem::path("spool");
    spool_result(where, d.get_string("session_id"), *d.find("result"));
    runtime::Message note;
    note.receiver = d.get_string("paa");
    note.performative = runtime::Performative::inform;
    note.conversation = d.get_string("conversation");
    note.payload = payload;
    note.payload["type"] = "result";
    note.payload["spooled"] = true;
    ctx.send(note);
    out["spooled"] = true;
    return out;
}

Value shutdown(const ActivityCall& call)
{
    context_of(call).terminate_self();
    return Value{};
}

} // namespace

runtime::Behavior evaluation_agent_behavior()
{
    auto reg = std::make_shared<behavior::ActivityRegistry>();
    reg->add("arrive", arrive);
    reg->add("greet", greet);
    reg->add("ask", ask);
    reg->add("record", record);
    reg->add("grade", grade);
    reg->add("report", report);
    reg->add("shutdown", shutdown);
    runtime::Behavior b;
    b.id = k_ea_behavior;
    b.tasks.push_back(behavior::validate_model(ea_task_model()));
    b.activities = std::move(reg);
    return b;
}

} // namespace agentest::sas
