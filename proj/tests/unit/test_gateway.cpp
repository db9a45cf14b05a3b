#include <doctest.h>

#include "gateway/gateway.hpp"
#include "sas_support.hpp"

using namespace agentest;
using namespace agentest::gateway;
using namespace test_support;
using nlohmann::json;

namespace {

struct Client {
    Gateway& g;
    std::string token;

    HttpResponse call(const std::string& method, const std::string& path, const json& body = nullptr,
                      std::map<std::string, std::string> query = {})
    {
        HttpRequest r;
        r.method = method;
        r.path = path;
        r.query = std::move(query);
        if (!body.is_null())
            r.body = body.dump();
        if (!token.empty())
            r.authorization = "Bearer " + token;
        return g.handle(r);
    }
};

Client login(Gateway& g, const std::string& user)
{
    Client anon{g, {}};
    auto r = anon.call("POST", "/api/login", {{"user", user}, {"credential", "pw"}});
    REQUIRE(r.status == 200);
    return {g, r.body["token"].get<std::string>()};
}

json new_test(const std::string& id)
{
    return {{"id", id}, {"title", "T"}, {"kind", "self_assessment"}, {"questions", {"q01", "q02"}}, {"max_questions", 2}};
}

} // namespace

TEST_SUITE("gateway")
{
    TEST_CASE("login issues a token and a second login replaces the first")
    {
        TempDir dir("gw");
        sas::Deployment d(sim_config(dir));
        Gateway g(d);
        Client anon{g, {}};
        CHECK(anon.call("POST", "/api/login", {{"user", "s1"}, {"credential", "nope"}}).status == 401);
        CHECK(anon.call("GET", "/api/tests").status == 401);
        auto a = login(g, "s1");
        CHECK(a.token.size() == 32);
        CHECK(a.call("GET", "/api/sessions").status == 200);
        auto b = login(g, "s1");
        CHECK(a.call("GET", "/api/sessions").status == 401);
        CHECK(b.call("GET", "/api/sessions").status == 200);
        CHECK(anon.call("GET", "/api/nowhere").status == 401);
        CHECK(b.call("GET", "/api/nowhere").status == 404);
    }

    TEST_CASE("role matrix")
    {
        TempDir dir("gw");
        sas::Deployment d(sim_config(dir));
        Gateway g(d);
        auto s1 = login(g, "s1");
        auto prof = login(g, "prof");
        auto prof2 = login(g, "prof2");
        auto root = login(g, "root");

        // tests
        auto listed = s1.call("GET", "/api/tests");
        REQUIRE(listed.status == 200);
        for (const auto& t : listed.body["tests"])
            CHECK(t["body"]["kind"] == "self_assessment");
        CHECK(s1.call("POST", "/api/tests", new_test("x1")).status == 403);
        auto created = prof.call("POST", "/api/tests", new_test("x1"));
        REQUIRE(created.status == 201);
        CHECK(prof.call("POST", "/api/tests", new_test("x1")).status == 409);
        CHECK(prof2.call("PUT", "/api/tests/x1", {{"version", 1}, {"test", new_test("x1")}}).status == 403);
        CHECK(s1.call("DELETE", "/api/tests/x1").status == 403);
        auto bad = new_test("x2");
        bad["questions"] = {"nope"};
        bad["max_questions"] = 1;
        CHECK(prof.call("POST", "/api/tests", bad).status == 404);

        // version conflict returns the current entity
        auto upd = prof.call("PUT", "/api/tests/x1", {{"version", 1}, {"test", new_test("x1")}});
        CHECK(upd.status == 200);
        auto stale = prof.call("PUT", "/api/tests/x1", {{"version", 1}, {"test", new_test("x1")}});
        CHECK(stale.status == 409);
        CHECK(stale.body["code"] == "version-conflict");
        CHECK(stale.body.contains("current"));
        CHECK(root.call("DELETE", "/api/tests/x1").status == 200);
        CHECK(prof.call("GET", "/api/tests/x1").status == 404);

        // exams
        CHECK(s1.call("GET", "/api/exams").status == 403);
        CHECK(s1.call("POST", "/api/exams", json::object()).status == 403);
        CHECK(prof.call("GET", "/api/exams").status == 200);
        CHECK(s1.call("GET", "/api/exams/exam-1/results").status == 403);
        CHECK(prof.call("GET", "/api/exams/exam-9/results").status == 404);

        // sessions are for students
        CHECK(prof.call("POST", "/api/self-assessments", {{"test_id", "algebra-practice"}}).status == 403);
        CHECK(root.call("GET", "/api/sessions").status == 403);

        // results
        CHECK(s1.call("GET", "/api/results").status == 200);
        CHECK(s1.call("GET", "/api/results", nullptr, {{"student", "s2"}}).status == 403);
        CHECK(prof.call("GET", "/api/results").status == 200);
        CHECK(root.call("GET", "/api/results", nullptr, {{"student", "s2"}}).status == 200);
    }

    TEST_CASE("self-assessment over the API")
    {
        TempDir dir("gw");
        sas::Deployment d(sim_config(dir));
        Gateway g(d);
        auto s1 = login(g, "s1");

        auto refused = s1.call("POST", "/api/self-assessments", {{"topic", "astronomy"}});
        CHECK(refused.status == 422);
        CHECK(refused.body["code"] == "unknown-topic");
        CHECK(s1.call("POST", "/api/self-assessments", {{"test_id", "midterm"}}).status == 422);

        auto started = s1.call("POST", "/api/self-assessments", {{"test_id", "algebra-practice"}, {"count", 2}});
        REQUIRE(started.status == 201);
        std::string sid = started.body["session_id"];
        CHECK(s1.call("POST", "/api/self-assessments", {{"test_id", "algebra-practice"}}).status == 409);

        auto q = s1.call("GET", "/api/sessions/" + sid + "/question");
        REQUIRE(q.status == 200);
        REQUIRE(q.body["question"].is_object());
        CHECK_FALSE(q.body["question"].contains("answer"));
        std::string qid = q.body["question"]["id"];
        auto wrong_q = s1.call("POST", "/api/sessions/" + sid + "/answer", {{"question_id", "q99"}, {"answer", 1}});
        CHECK(wrong_q.status == 409);
        CHECK(wrong_q.body["code"] == "out-of-order");
        auto ans = s1.call("POST", "/api/sessions/" + sid + "/answer",
                           {{"question_id", qid}, {"answer", to_json(wrong_answer(from_json(q.body["question"])))}});
        CHECK(ans.status == 200);

        auto quit = s1.call("POST", "/api/sessions/" + sid + "/quit");
        REQUIRE(quit.status == 200);
        CHECK(quit.body["state"] == "finished");
        CHECK(quit.body["result"]["status"] == "quit");
        CHECK(s1.call("POST", "/api/sessions/" + sid + "/answer", {{"answer", 1}}).status == 404);
        CHECK(s1.call("GET", "/api/sessions/nope/question").status == 404);
        CHECK(s1.call("GET", "/api/results").body["results"].empty());
    }
}

#include <httplib.h>
#include <thread>

TEST_SUITE("gateway")
{
    TEST_CASE("real clock deployment over HTTP")
    {
        TempDir dir("gwhttp");
        auto cfg = sim_config(dir);
        cfg.simulated_clock = false;
        cfg.tick_ms = 5;
        sas::Deployment d(cfg);
        d.start();
        Gateway g(d);
        int port = g.bind("127.0.0.1", 0);
        std::thread server([&] { g.run(); });

        httplib::Client cli("127.0.0.1", port);
        cli.set_read_timeout(10, 0);
        auto login = cli.Post("/api/login", R"({"user":"s1","credential":"pw"})", "application/json");
        REQUIRE(login);
        REQUIRE(login->status == 200);
        httplib::Headers auth{{"Authorization", "Bearer " + json::parse(login->body)["token"].get<std::string>()}};

        auto start = cli.Post("/api/self-assessments", auth, R"({"test_id":"algebra-practice","count":2})",
                              "application/json");
        REQUIRE(start);
        REQUIRE(start->status == 201);
        std::string sid = json::parse(start->body)["session_id"];
        int answered = 0;
        json last;
        for (int i = 0; i < 40 && answered <= 2; ++i) {
            auto q = cli.Get(("/api/sessions/" + sid + "/question").c_str(), auth);
            REQUIRE(q);
            last = json::parse(q->body);
            if (last["state"] == "finished")
                break;
            if (!last.contains("question"))
                continue;
            json body = {{"question_id", last["question"]["id"]},
                         {"answer", to_json(wrong_answer(from_json(last["question"])))}};
            auto a = cli.Post(("/api/sessions/" + sid + "/answer").c_str(), auth, body.dump(), "application/json");
            REQUIRE(a);
            CHECK(a->status == 200);
            ++answered;
        }
        CHECK(answered == 2);
        CHECK(last["state"] == "finished");
        CHECK(last["result"]["status"] == "completed");
        CHECK(cli.Get("/api/tests")->status == 401);

        g.stop();
        server.join();
        d.stop();
    }
}
