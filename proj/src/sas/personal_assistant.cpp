#include "runtime/container.hpp"
#include "sas/agents.hpp"
#include "sas/models.hpp"

namespace agentest::sas {

using behavior::ActivityCall;
using runtime::context_of;

Value error_reply(const Error& e)
{
    Value v = Value::map();
    v["ok"] = false;
    v["code"] = std::string(e.code_name());
    v["detail"] = e.detail();
    return v;
}

Value result_body(const eval::TestResult& r, const std::string& status, const std::string& kind,
                  const std::string& exam_id)
{
    Value v = r.to_value();
    v["status"] = status;
    v["kind"] = kind;
    v["answered"] = static_cast<std::int64_t>(r.scores.size());
    if (!exam_id.empty())
        v["exam_id"] = exam_id;
    return v;
}

Value paa_init(const std::string& user, const std::string& role)
{
    Value v = Value::map();
    v["user"] = user;
    v["role"] = role;
    v["counter"] = 0;
    v["sessions"] = Value::map();
    v["acks"] = Value::map();
    v["replies"] = Value::map();
    return v;
}

Value BridgeAction::to_value() const
{
    Value v = Value::map();
    v["send"] = send;
    v["to"] = to;
    v["conversation"] = conversation;
    v["payload"] = payload;
    return v;
}

namespace {

bool open_state(const Value& s)
{
    auto st = s.get_string("state");
    return st == "pending" || st == "live";
}

Value* session_of(Value& desk, const std::string& sid)
{
    Value& all = desk["sessions"];
    auto it = all.as_map().find(sid);
    return it == all.as_map().end() ? nullptr : &it->second;
}

Value& live_session(Value& desk, const Value& ui)
{
    std::string sid = ui.get_string("session_id");
    Value* s = session_of(desk, sid);
    if (!s || !open_state(*s))
        fail(Errc::no_active_session, "no active session '" + sid + "'");
    return *s;
}

BridgeAction answer_to(const Value& s, Value payload)
{
    BridgeAction a;
    a.send = "answer";
    a.to = s.get_string("ea");
    a.conversation = s.get_string("conversation");
    a.payload = std::move(payload);
    return a;
}

Value quit_payload(const Value& s)
{
    Value p = Value::map();
    p["session_id"] = s.get_string("session_id");
    p["quit"] = true;
    if (auto* q = s.find_path("asked_id"); q && q->is_string())
        p["question_id"] = *q;
    return p;
}

std::string conversation_for(Value& desk, const char* what)
{
    auto n = desk.get_int("counter") + 1;
    desk["counter"] = n;
    return std::string(what) + ":" + desk.get_string("user") + ":" + std::to_string(n);
}

BridgeAction bridge(Value& desk, const Value& ui, Value& ack)
{
    const std::string user = desk.get_string("user");
    const std::string role = desk.get_string("role");
    if (ui.get_string("_sender") != ui_sender(user))
        fail(Errc::forbidden, "'" + ui.get_string("_sender") + "' does not speak for '" + user + "'");
    const std::string action = ui.get_string("action");
    BridgeAction out;

    if (action == "start") {
        if (role != "student")
            fail(Errc::forbidden, "only students take self-assessments");
        for (const auto& [id, s] : desk["sessions"].as_map())
            if (s.get_string("kind") == "pull" && open_state(s))
                fail(Errc::live_session_exists, "session '" + id + "' is still running");
        const Value* cfg = ui.find("config");
        auto config = SelfAssessmentConfig::from_value(cfg ? *cfg : Value{});
        auto n = desk.get_int("counter") + 1;
        desk["counter"] = n;
        std::string sid = user + "-" + std::to_string(n);
        Value s = Value::map();
        s["session_id"] = sid;
        s["kind"] = "pull";
        s["state"] = "pending";
        s["conversation"] = "pull:" + sid;
        s["ea"] = pull_ea(sid);
        s["question"] = Value{};
        s["result"] = Value{};
        s["error"] = Value{};
        s["pending_quit"] = false;
        desk["sessions"][sid] = s;
        out.send = "request";
        out.to = k_sa_name;
        out.conversation = "pull:" + sid;
        out.payload["session_id"] = sid;
        out.payload["student"] = user;
        out.payload["config"] = config.to_value();
        ack["session_id"] = sid;
        return out;
    }
    if (action == "answer") {
        if (role != "student")
            fail(Errc::forbidden, "only students answer questions");
        Value& s = live_session(desk, ui);
        const Value* q = s.find("question");
        if (!q || !q->is_map())
            fail(Errc::out_of_order, "no question is waiting for an answer");
        std::string shown = q->get_string("id");
        if (auto qid = ui.get_string("question_id"); !qid.empty() && qid != shown)
            fail(Errc::out_of_order, "question '" + qid + "' is not the one displayed ('" + shown + "')");
        Value p = Value::map();
        p["session_id"] = s.get_string("session_id");
        p["question_id"] = shown;
        const Value* ans = ui.find("answer");
        p["answer"] = ans ? *ans : Value{};
        s["question"] = Value{};
        s["asked_id"] = shown;
        return answer_to(s, std::move(p));
    }
    if (action == "quit") {
        if (role != "student")
            fail(Errc::forbidden, "only students quit sessions");
        Value& s = live_session(desk, ui);
        const Value* q = s.find("question");
        if (q && q->is_map()) {
            s["asked_id"] = q->get_string("id");
            s["question"] = Value{};
            return answer_to(s, quit_payload(s));
        }
        s["pending_quit"] = true;
        ack["deferred"] = true;
        return out;
    }
    if (action == "tests" || action == "schedule") {
        std::string op = ui.get_string("op");
        bool read_only = op == "list" || op == "get";
        if (role == "student" && (action == "schedule" || !read_only))
            fail(Errc::forbidden, "students may only look at tests");
        out.send = action;
        out.to = k_sa_name;
        out.conversation = conversation_for(desk, action.c_str());
        out.payload = ui;
        for (const char* k : {"_sender", "_conversation", "_performative", "_seq", "_event", "type", "action", "ui_id"})
            out.payload.as_map().erase(k);
        out.payload["role"] = role;
        ack["conversation"] = out.conversation;
        return out;
    }
    fail(Errc::invalid_argument, "unknown action '" + action + "'");
}

} // namespace

BridgeAction paa_bridge(Value& desk, const Value& ui)
{
    Value ack = Value::map();
    BridgeAction out;
    try {
        ack["ok"] = true;
        out = bridge(desk, ui, ack);
    } catch (const Error& e) {
        ack = error_reply(e);
        out = BridgeAction{};
    }
    std::string ui_id = ui.get_string("ui_id");
    if (!ui_id.empty())
        desk["acks"][ui_id] = ack;
    return out;
}

BridgeAction paa_absorb(Value& desk, const Value& ev)
{
    BridgeAction out;
    const std::string type = ev.get_string("_event");
    if (type == "tests_reply" || type == "schedule_reply") {
        Value r = ev;
        for (const char* k : {"_sender", "_performative", "_seq", "_event", "type"})
            r.as_map().erase(k);
        desk["replies"][ev.get_string("_conversation")] = r;
        return out;
    }

    std::string sid = ev.get_string("session_id");
    if (sid.empty())
        return out;
    Value* s = session_of(desk, sid);
    if (!s) {
        // exam sessions start on the EA's first contact
        Value fresh = Value::map();
        fresh["session_id"] = sid;
        fresh["kind"] = ev.get_string("kind", "push");
        fresh["exam_id"] = ev.get_string("exam_id");
        fresh["state"] = "live";
        fresh["conversation"] = ev.get_string("_conversation");
        fresh["ea"] = push_ea(ev.get_string("exam_id"), desk.get_string("user"));
        fresh["question"] = Value{};
        fresh["result"] = Value{};
        fresh["error"] = Value{};
        fresh["pending_quit"] = false;
        desk["sessions"][sid] = fresh;
        s = session_of(desk, sid);
    }
    Value& sess = *s;

    if (type == "agree") {
        sess["state"] = "live";
        sess["ea"] = ev.get_string("ea", sess.get_string("ea"));
        sess["title"] = ev.get_string("title");
        sess["max"] = ev.get_int("max_questions");
    } else if (type == "refuse" || type == "failure") {
        sess["state"] = type == "refuse" ? "refused" : "failed";
        Value err = Value::map();
        err["code"] = ev.get_string("code");
        err["detail"] = ev.get_string("detail");
        sess["error"] = err;
    } else if (type == "question") {
        if (sess.get_string("state") == "finished")
            return out;
        sess["state"] = "live";
        sess["ea"] = ev.get_string("_sender");
        sess["index"] = ev.get_int("index");
        sess["max"] = ev.get_int("max");
        sess["title"] = ev.get_string("title");
        const Value* err = ev.find("error");
        sess["error"] = err ? *err : Value{};
        const Value* q = ev.find("question");
        if (sess.get_bool("pending_quit") && q) {
            sess["pending_quit"] = false;
            sess["asked_id"] = q->get_string("id");
            sess["question"] = Value{};
            return answer_to(sess, quit_payload(sess));
        }
        sess["question"] = q ? *q : Value{};
    } else if (type == "result" || type == "inform") {
        sess["state"] = "finished";
        sess["question"] = Value{};
        const Value* r = ev.find("result");
        sess["result"] = r ? *r : Value{};
        if (ev.get_bool("spooled"))
            sess["spooled"] = true;
    }
    return out;
}

namespace {

Value ui_action(const ActivityCall& call)
{
    return paa_bridge(context_of(call).data(), call.args[0]).to_value();
}

Value absorb(const ActivityCall& call)
{
    return paa_absorb(context_of(call).data(), call.args[0]).to_value();
}

} // namespace

runtime::Behavior personal_assistant_behavior()
{
    auto reg = std::make_shared<behavior::ActivityRegistry>();
    reg->add("ui_action", ui_action);
    reg->add("absorb", absorb);
    runtime::Behavior b;
    b.id = k_paa_behavior;
    b.tasks.push_back(behavior::validate_model(paa_task_model()));
    b.activities = std::move(reg);
    return b;
}

} // namespace agentest::sas
