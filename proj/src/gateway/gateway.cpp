#include "gateway/gateway.hpp"

#include <httplib.h>

#include "core/crypto.hpp"
#include "core/log.hpp"

namespace agentest::gateway {

using store::EntityKind;

int http_status(Errc code)
{
    switch (code) {
    case Errc::unauthorized: return 401;
    case Errc::forbidden: return 403;
    case Errc::not_found:
    case Errc::unknown_test:
    case Errc::unknown_question:
    case Errc::no_active_session: return 404;
    case Errc::version_conflict:
    case Errc::live_session_exists:
    case Errc::referential_in_use:
    case Errc::out_of_order:
    case Errc::duplicate_answer: return 409;
    case Errc::refused:
    case Errc::unknown_topic: return 422;
    case Errc::timeout: return 504;
    case Errc::invalid_argument:
    case Errc::invalid_window:
    case Errc::schema_error:
    case Errc::parse_error:
    case Errc::invalid_question:
    case Errc::missing_answer:
    case Errc::type_mismatch: return 400;
    default: return 500;
    }
}

namespace {

HttpResponse error_response(int status, std::string_view code, const std::string& detail)
{
    HttpResponse r;
    r.status = status;
    r.body = {{"code", std::string(code)}, {"detail", detail}};
    return r;
}

HttpResponse error_response(const Error& e)
{
    return error_response(http_status(e.code()), e.code_name(), e.detail());
}

// An {ok:false, code, detail} reply from an agent.
HttpResponse reply_error(const Value& reply)
{
    Errc code = errc_from_name(reply.get_string("code"));
    auto r = error_response(http_status(code), reply.get_string("code"), reply.get_string("detail"));
    if (auto* cur = reply.find("current"))
        r.body["current"] = to_json(*cur);
    return r;
}

HttpResponse ok(nlohmann::json body, int status = 200)
{
    HttpResponse r;
    r.status = status;
    r.body = std::move(body);
    return r;
}

Value parse_body(const std::string& body)
{
    if (body.empty())
        return Value::map();
    try {
        Value v = from_json(nlohmann::json::parse(body));
        if (!v.is_map())
            fail(Errc::invalid_argument, "request body must be a JSON object");
        return v;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, std::string("request body is not JSON: ") + e.what());
    }
}

std::vector<std::string> segments(const std::string& path)
{
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < path.size()) {
        auto j = path.find('/', i);
        if (j == std::string::npos)
            j = path.size();
        if (j > i)
            out.push_back(path.substr(i, j - i));
        i = j + 1;
    }
    return out;
}

void require(const ApiSession& s, std::initializer_list<const char*> roles)
{
    for (const char* r : roles)
        if (s.role == r)
            return;
    fail(Errc::forbidden, "role '" + s.role + "' may not do this");
}

nlohmann::json session_json(const Value& s)
{
    nlohmann::json j = {{"session_id", s.get_string("session_id")},
                        {"kind", s.get_string("kind")},
                        {"state", s.get_string("state")}};
    for (const char* k : {"exam_id", "title", "index", "max", "question", "result", "error", "spooled"})
        if (auto* v = s.find(k); v && !v->is_null())
            j[k] = to_json(*v);
    return j;
}

} // namespace

Gateway::Gateway(sas::Deployment& deployment) : d_(deployment) {}

Gateway::~Gateway()
{
    stop();
}

std::mutex& Gateway::user_lock(const std::string& user)
{
    std::lock_guard lock(mu_);
    auto& m = user_locks_[user];
    if (!m)
        m = std::make_unique<std::mutex>();
    return *m;
}

HttpResponse Gateway::handle(const HttpRequest& request)
{
    try {
        return route(request);
    } catch (const Error& e) {
        return error_response(e);
    } catch (const std::exception& e) {
        log().error("gateway: {} {}: {}", request.method, request.path, e.what());
        return error_response(500, "internal", e.what());
    }
}

ApiSession Gateway::authenticate(const HttpRequest& r)
{
    const std::string prefix = "Bearer ";
    if (!r.authorization.starts_with(prefix))
        fail(Errc::unauthorized, "missing bearer token");
    std::lock_guard lock(mu_);
    auto it = by_token_.find(r.authorization.substr(prefix.size()));
    if (it == by_token_.end())
        fail(Errc::unauthorized, "unknown or replaced token");
    return it->second;
}

HttpResponse Gateway::route(const HttpRequest& r)
{
    auto seg = segments(r.path);
    if (seg.size() < 2 || seg[0] != "api")
        fail(Errc::not_found, "no route " + r.path);
    const std::string& m = r.method;
    if (seg[1] == "health" && seg.size() == 2 && m == "GET")
        return ok({{"ok", true}});
    if (seg[1] == "login" && seg.size() == 2) {
        if (m != "POST")
            fail(Errc::not_found, "no route " + m + " " + r.path);
        return login(r);
    }
    ApiSession s = authenticate(r);
    if (seg[1] == "tests" && seg.size() <= 3)
        return tests(s, r, seg.size() == 3 ? seg[2] : std::string{});
    if (seg[1] == "exams" && seg.size() == 2)
        return exams(s, r);
    if (seg[1] == "exams" && seg.size() == 4 && seg[3] == "results" && m == "GET")
        return exam_results(s, seg[2]);
    if (seg[1] == "self-assessments" && seg.size() == 2 && m == "POST")
        return start_self_assessment(s, r);
    if (seg[1] == "sessions" && seg.size() == 2 && m == "GET")
        return list_sessions(s);
    if (seg[1] == "sessions" && seg.size() == 4) {
        const std::string& verb = seg[3];
        if ((verb == "question" && m == "GET") || ((verb == "answer" || verb == "quit") && m == "POST"))
            return session_verb(s, r, seg[2], verb);
    }
    if (seg[1] == "results" && seg.size() == 2 && m == "GET")
        return results(s, r);
    fail(Errc::not_found, "no route " + m + " " + r.path);
}

HttpResponse Gateway::login(const HttpRequest& r)
{
    Value b = parse_body(r.body);
    std::string user = b.get_string("user");
    std::string credential = b.get_string("credential");
    const auto* u = d_.config().user(user);
    if (!u || u->credential.empty() ||
        !crypto::constant_time_equal(crypto::as_bytes(u->credential), crypto::as_bytes(credential)))
        fail(Errc::unauthorized, "unknown user or wrong credential");
    ApiSession s{crypto::random_token(128), u->id, u->role, sas::paa_name(*u)};
    {
        std::lock_guard lock(mu_);
        if (auto old = token_of_.find(user); old != token_of_.end())
            by_token_.erase(old->second);
        token_of_[user] = s.token;
        by_token_[s.token] = s;
    }
    return ok({{"token", s.token}, {"user", s.user}, {"role", s.role}, {"agent", s.paa}});
}

Value Gateway::ack(const ApiSession& s, Value action)
{
    auto id = d_.ui(s.user, std::move(action));
    return d_.wait_ack(s.user, id, d_.config().http.request_timeout_ms);
}

Value Gateway::relay(const ApiSession& s, Value action)
{
    Value a = ack(s, std::move(action));
    if (!a.get_bool("ok"))
        return a;
    std::string conv = a.get_string("conversation");
    std::optional<Value> reply;
    d_.pump([&] {
        auto desk = d_.desk(s.user);
        if (auto* v = desk ? desk->find_path("replies." + conv) : nullptr)
            reply = *v;
        return reply.has_value();
    }, d_.config().http.request_timeout_ms);
    if (!reply)
        fail(Errc::timeout, "the server agent did not answer in time");
    return *reply;
}

HttpResponse Gateway::tests(const ApiSession& s, const HttpRequest& r, const std::string& id)
{
    Value act = Value::map();
    act["action"] = "tests";
    const std::string& m = r.method;
    int created = 200;
    if (id.empty() && m == "GET") {
        act["op"] = "list";
    } else if (id.empty() && m == "POST") {
        require(s, {"instructor", "admin"});
        act["op"] = "create";
        act["test"] = parse_body(r.body);
        created = 201;
    } else if (!id.empty() && m == "GET") {
        act["op"] = "get";
        act["id"] = id;
    } else if (!id.empty() && m == "PUT") {
        require(s, {"instructor", "admin"});
        Value b = parse_body(r.body);
        auto* version = b.find("version");
        if (!version || !version->is_int())
            fail(Errc::invalid_argument, "update needs the integer 'version' it was based on");
        act["op"] = "update";
        act["id"] = id;
        act["version"] = *version;
        const Value* t = b.find("test");
        act["test"] = t ? *t : Value::map();
    } else if (!id.empty() && m == "DELETE") {
        require(s, {"instructor", "admin"});
        act["op"] = "delete";
        act["id"] = id;
    } else {
        fail(Errc::not_found, "no route " + m + " " + r.path);
    }
    Value reply = relay(s, act);
    if (!reply.get_bool("ok"))
        return reply_error(reply);
    auto body = to_json(reply);
    body.erase("ok");
    return ok(body, created);
}

HttpResponse Gateway::exams(const ApiSession& s, const HttpRequest& r)
{
    require(s, {"instructor", "admin"});
    Value act = Value::map();
    act["action"] = "schedule";
    if (r.method == "POST") {
        act["op"] = "create";
        act["schedule"] = parse_body(r.body);
    } else if (r.method == "GET") {
        act["op"] = "list";
    } else {
        fail(Errc::not_found, "no route " + r.method + " " + r.path);
    }
    Value reply = relay(s, act);
    if (!reply.get_bool("ok"))
        return reply_error(reply);
    auto body = to_json(reply);
    body.erase("ok");
    return ok(body, r.method == "POST" ? 201 : 200);
}

HttpResponse Gateway::exam_results(const ApiSession& s, const std::string& exam_id)
{
    require(s, {"instructor", "admin"});
    auto sched = d_.store().find(EntityKind::schedule, exam_id);
    if (!sched)
        fail(Errc::not_found, "no exam '" + exam_id + "'");
    if (s.role != "admin" && sched->body.get_string("author") != s.user)
        fail(Errc::forbidden, "exam '" + exam_id + "' belongs to '" + sched->body.get_string("author") + "'");
    auto rows = nlohmann::json::array();
    for (const auto& e : d_.store().list(EntityKind::result, {{"exam_id", Value(exam_id)}}))
        rows.push_back(to_json(e.body));
    return ok({{"exam_id", exam_id}, {"results", rows}});
}

HttpResponse Gateway::start_self_assessment(const ApiSession& s, const HttpRequest& r)
{
    require(s, {"student"});
    std::lock_guard order(user_lock(s.user));
    Value act = Value::map();
    act["action"] = "start";
    act["config"] = parse_body(r.body);
    Value a = ack(s, act);
    if (!a.get_bool("ok"))
        return reply_error(a);
    std::string sid = a.get_string("session_id");
    std::optional<Value> sess;
    d_.pump([&] {
        auto desk = d_.desk(s.user);
        const Value* v = desk ? desk->find_path("sessions." + sid) : nullptr;
        if (v && v->get_string("state") != "pending")
            sess = *v;
        return sess.has_value();
    }, d_.config().http.request_timeout_ms);
    if (!sess)
        return ok({{"session_id", sid}, {"state", "pending"}}, 202);
    std::string state = sess->get_string("state");
    if (state == "refused" || state == "failed") {
        const Value* err = sess->find("error");
        auto resp = error_response(422, err ? err->get_string("code") : "refused",
                                   err ? err->get_string("detail") : std::string("request refused"));
        resp.body["session_id"] = sid;
        return resp;
    }
    return ok(session_json(*sess), 201);
}

HttpResponse Gateway::list_sessions(const ApiSession& s)
{
    require(s, {"student"});
    auto desk = d_.desk(s.user);
    auto out = nlohmann::json::array();
    if (desk)
        if (auto* all = desk->find("sessions"); all && all->is_map())
            for (const auto& [id, v] : all->as_map())
                out.push_back(session_json(v));
    return ok({{"sessions", out}});
}

HttpResponse Gateway::session_verb(const ApiSession& s, const HttpRequest& r, const std::string& id,
                                   const std::string& verb)
{
    require(s, {"student"});
    std::lock_guard order(user_lock(s.user));
    auto current = [&]() -> std::optional<Value> {
        auto desk = d_.desk(s.user);
        const Value* v = desk ? desk->find_path("sessions." + id) : nullptr;
        return v ? std::optional<Value>(*v) : std::nullopt;
    };
    auto sess = current();
    if (!sess)
        fail(Errc::no_active_session, "no session '" + id + "'");

    if (verb == "question") {
        auto shown = [](const Value& v) {
            auto st = v.get_string("state");
            const Value* q = v.find("question");
            return st == "finished" || st == "refused" || st == "failed" || (q && q->is_map());
        };
        if (!shown(*sess))
            d_.pump([&] { return (sess = current()) && shown(*sess); }, d_.config().http.question_wait_ms);
        return ok(session_json(*sess));
    }

    Value body = parse_body(r.body);
    Value act = Value::map();
    act["action"] = verb;
    act["session_id"] = id;
    if (verb == "answer") {
        const Value* ans = body.find("answer");
        if (!ans)
            fail(Errc::invalid_argument, "missing 'answer'");
        act["answer"] = *ans;
        if (auto qid = body.get_string("question_id"); !qid.empty())
            act["question_id"] = qid;
    }
    Value a = ack(s, act);
    if (!a.get_bool("ok"))
        return reply_error(a);
    if (verb == "answer")
        return ok({{"session_id", id}, {"accepted", true}});
    d_.pump([&] { return (sess = current()) && sess->get_string("state") == "finished"; },
            d_.config().http.request_timeout_ms);
    return ok(session_json(*sess));
}

HttpResponse Gateway::results(const ApiSession& s, const HttpRequest& r)
{
    std::string student;
    if (auto it = r.query.find("student"); it != r.query.end())
        student = it->second;
    std::string exam;
    if (auto it = r.query.find("exam_id"); it != r.query.end())
        exam = it->second;
    store::Filter f;
    if (s.role == "student") {
        if (!student.empty() && student != s.user)
            fail(Errc::forbidden, "students see only their own results");
        student = s.user;
    }
    if (!student.empty())
        f["student"] = student;
    if (!exam.empty())
        f["exam_id"] = exam;
    std::set<std::string> own_tests;
    if (s.role == "instructor")
        for (const auto& t : d_.store().list(EntityKind::test, {{"author", Value(s.user)}}))
            own_tests.insert(t.id);
    auto rows = nlohmann::json::array();
    for (const auto& e : d_.store().list(EntityKind::result, f))
        if (s.role != "instructor" || own_tests.contains(e.body.get_string("test_id")))
            rows.push_back(to_json(e.body));
    return ok({{"results", rows}});
}

// ---------------------------------------------------------------------------

int Gateway::bind(const std::string& host, int port)
{
    server_ = std::make_unique<httplib::Server>();
    auto adapt = [this](const httplib::Request& req, httplib::Response& res) {
        HttpRequest r;
        r.method = req.method;
        r.path = req.path;
        for (const auto& [k, v] : req.params)
            r.query[k] = v;
        r.body = req.body;
        r.authorization = req.get_header_value("Authorization");
        HttpResponse out = handle(r);
        res.status = out.status;
        res.set_content(out.body.dump(), "application/json");
    };
    server_->Get("/api/.*", adapt);
    server_->Post("/api/.*", adapt);
    server_->Put("/api/.*", adapt);
    server_->Delete("/api/.*", adapt);
    int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
    if (bound < 0)
        fail(Errc::address_in_use, "cannot listen on " + host + ":" + std::to_string(port));
    return bound;
}

void Gateway::run()
{
    if (!server_)
        fail(Errc::invalid_argument, "bind() first");
    server_->listen_after_bind();
}

void Gateway::stop()
{
    if (server_)
        server_->stop();
}

} // namespace agentest::gateway
