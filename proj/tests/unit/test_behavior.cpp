#include <doctest.h>

#include "behavior/guard.hpp"
#include "behavior/task_instance.hpp"
#include "behavior/task_model.hpp"
#include "runtime/platform.hpp"

using namespace agentest;
using namespace agentest::behavior;
using nlohmann::json;

namespace {

ModelPtr model_of(const std::string& text)
{
    return validate_model(task_model_from_json(json::parse(text)));
}

std::vector<std::string> issue_kinds(const std::string& text)
{
    try {
        validate_model(task_model_from_json(json::parse(text)));
    } catch (const ModelValidationError& e) {
        std::vector<std::string> out;
        for (const auto& i : e.issues())
            out.push_back(i.kind);
        return out;
    }
    return {};
}

bool contains(const std::vector<std::string>& v, const std::string& s)
{
    return std::find(v.begin(), v.end(), s) != v.end();
}

// Runs steps until nothing progresses; returns the states visited.
std::vector<std::string> run(TaskInstance& t, const ActivityRegistry& reg, int max_steps = 100)
{
    std::vector<std::string> states{t.current_state};
    for (int i = 0; i < max_steps; ++i) {
        auto out = step_task(t, reg);
        if (!out.progressed())
            break;
        if (out.state_changed)
            states.push_back(t.current_state);
    }
    return states;
}

} // namespace

TEST_SUITE("behavior")
{
    TEST_CASE("guard expressions")
    {
        Value scope = Value::map();
        scope["x"] = 3;
        scope["s"]["name"] = "ann";
        scope["flag"] = true;
        CHECK(Guard::parse("").evaluate(scope));
        CHECK(Guard::parse("x == 3").evaluate(scope));
        CHECK(Guard::parse("x >= 2 && x < 4").evaluate(scope));
        CHECK(Guard::parse("s.name == \"ann\" and flag").evaluate(scope));
        CHECK(Guard::parse("not (x > 5) || missing.path == null").evaluate(scope));
        CHECK_FALSE(Guard::parse("x != 3").evaluate(scope));
        CHECK(Guard::parse("missing == null").evaluate(scope));
        CHECK_THROWS_AS(Guard::parse("x == "), Error);
        CHECK_THROWS_AS(Guard::parse("x < \"a\"").evaluate(scope), Error);
        auto vars = Guard::parse("a.b == 1 && c").variables();
        CHECK(contains(vars, "a"));
        CHECK(contains(vars, "c"));
    }

    TEST_CASE("validation reports structural errors")
    {
        CHECK(issue_kinds(R"({"task":"t","initial":"A","context":[],"states":[{"name":"A"}]})").empty());
        CHECK(contains(issue_kinds(R"({"task":"t","initial":"A","context":[],"states":[{"name":"A"}],
            "transitions":[{"from":"B","to":"A"}]})"), "dangling-state"));
        CHECK(contains(issue_kinds(R"({"task":"t","initial":"A","context":[],"states":[{"name":"A"}],
            "transitions":[{"from":"A","to":"A","guard":"nope == 1"}]})"), "unknown-variable"));
        CHECK(contains(issue_kinds(R"({"task":"t","initial":"A","context":[],"states":[{"name":"A"}],
            "transitions":[{"from":"A","to":"A","trigger":"e"},{"from":"A","to":"A","trigger":"e"}]})"),
                       "duplicate-transition"));
        CHECK(contains(issue_kinds(R"({"task":"t","initial":"Z","context":[],"states":[{"name":"A"}]})"),
                       "dangling-state"));
    }

    TEST_CASE("document form round-trips")
    {
        auto m = task_model_from_json(json::parse(R"({"task":"t","initial":"A","context":["r"],
            "states":[{"name":"A","activities":[{"name":"f","params":["r"],"result":"r"}]},{"name":"B"}],
            "transitions":[{"from":"A","to":"B","trigger":"go","guard":"r == 1",
              "transmissions":[{"kind":"internal_event","target":"u","event":"e","payload":{"v":"$r"}}]}]})"));
        auto again = task_model_from_json(task_model_to_json(m));
        CHECK(task_model_to_json(again) == task_model_to_json(m));
        CHECK(again.transitions[0].transmissions[0].kind == TransmissionKind::internal_event);
    }

    TEST_CASE("activities run in order, once, before any transition")
    {
        auto m = model_of(R"({"task":"t","initial":"A","context":["a","b"],
            "states":[{"name":"A","activities":[{"name":"one","params":[],"result":"a"},
                                                {"name":"two","params":["a"],"result":"b"}]},{"name":"B"}],
            "transitions":[{"from":"A","to":"B"}]})");
        std::vector<std::string> calls;
        ActivityRegistry reg;
        reg.add("one", [&](const ActivityCall&) { calls.push_back("one"); return Value(1); });
        reg.add("two", [&](const ActivityCall& c) { calls.push_back("two"); return Value(c.args[0].as_int() + 1); });
        auto t = TaskInstance::start(m);
        auto s1 = step_task(t, reg);
        CHECK(s1.kind == StepOutcome::Kind::activity);
        CHECK(t.current_state == "A");
        auto s2 = step_task(t, reg);
        CHECK(s2.kind == StepOutcome::Kind::activity);
        CHECK(t.current_state == "A");
        auto s3 = step_task(t, reg);
        CHECK(s3.kind == StepOutcome::Kind::transition);
        CHECK(t.current_state == "B");
        CHECK(calls == std::vector<std::string>{"one", "two"});
        CHECK(t.context.get_int("b") == 2);
    }

    TEST_CASE("the first declared eligible transition wins")
    {
        auto m = model_of(R"({"task":"t","initial":"A","context":[],"states":[{"name":"A"},{"name":"B"},{"name":"C"}],
            "transitions":[{"from":"A","to":"C","trigger":"go","guard":"true"},{"from":"A","to":"B","trigger":"go"}]})");
        auto t = TaskInstance::start(m);
        t.post({"go", Value::map()});
        CHECK(eligible_transitions(t, &t.pending_events.front()).size() == 2);
        step_task(t, {});
        CHECK(t.current_state == "C");
    }

    TEST_CASE("eventless transitions fire only with an empty queue")
    {
        auto m = model_of(R"({"task":"t","initial":"A","context":[],"states":[{"name":"A"},{"name":"B"},{"name":"C"}],
            "transitions":[{"from":"A","to":"B"},{"from":"A","to":"C","trigger":"go"}]})");
        auto t = TaskInstance::start(m);
        t.post({"go", Value::map()});
        step_task(t, {});
        CHECK(t.current_state == "C");
        auto u = TaskInstance::start(m);
        step_task(u, {});
        CHECK(u.current_state == "B");
    }

    TEST_CASE("a transient state keeps events it has no trigger for")
    {
        auto m = model_of(R"({"task":"t","initial":"A","context":[],"states":[{"name":"A"},{"name":"B"},{"name":"C"}],
            "transitions":[{"from":"A","to":"B"},{"from":"B","to":"C","trigger":"later"}]})");
        auto t = TaskInstance::start(m);
        t.post({"later", Value::map()});
        auto s = step_task(t, {});
        CHECK(t.current_state == "B");
        CHECK_FALSE(s.consumed.has_value());
        step_task(t, {});
        CHECK(t.current_state == "C");
    }

    TEST_CASE("unmatched events in a stable state are dropped")
    {
        auto m = model_of(R"({"task":"t","initial":"A","context":[],"states":[{"name":"A"},{"name":"B"}],
            "transitions":[{"from":"A","to":"B","trigger":"go"}]})");
        auto t = TaskInstance::start(m);
        t.post({"noise", Value::map()});
        t.post({"go", Value::map()});
        auto s = step_task(t, {});
        CHECK(s.kind == StepOutcome::Kind::discarded_event);
        CHECK(t.current_state == "A");
        step_task(t, {});
        CHECK(t.current_state == "B");
    }

    TEST_CASE("events are consumed in FIFO order and bound as event")
    {
        auto m = model_of(R"({"task":"t","initial":"A","context":["got"],
            "states":[{"name":"A"},{"name":"B","activities":[{"name":"keep","params":["event"],"result":"got"}]}],
            "transitions":[{"from":"A","to":"B","trigger":"e"},{"from":"B","to":"A"}]})");
        std::vector<std::int64_t> seen;
        ActivityRegistry reg;
        reg.add("keep", [&](const ActivityCall& c) { seen.push_back(c.args[0].get_int("n")); return c.args[0]; });
        auto t = TaskInstance::start(m);
        for (int i = 1; i <= 3; ++i) {
            Value p = Value::map();
            p["n"] = i;
            t.post({"e", p});
        }
        run(t, reg);
        CHECK(seen == std::vector<std::int64_t>{1, 2, 3});
    }

    TEST_CASE("a throwing activity moves the task to failed")
    {
        auto m = model_of(R"({"task":"t","initial":"A","context":[],
            "states":[{"name":"A","activities":[{"name":"boom","params":[]}]}]})");
        ActivityRegistry reg;
        reg.add("boom", [](const ActivityCall&) -> Value { throw std::runtime_error("no"); });
        auto t = TaskInstance::start(m);
        auto s = step_task(t, reg);
        CHECK(s.kind == StepOutcome::Kind::failed);
        CHECK(t.failed());
        REQUIRE(s.emissions.size() == 1);
        CHECK(s.emissions[0].event == "task_failed");
    }

    TEST_CASE("transmission templates resolve against the scope")
    {
        auto m = model_of(R"({"task":"t","initial":"A","context":["who"],"states":[{"name":"A"},{"name":"B"}],
            "transitions":[{"from":"A","to":"B","trigger":"go","transmissions":[
              {"kind":"external_message","target":"$who","event":"hello","performative":"inform",
               "payload":{"n":"$event.n","lit":"$$cash"}}]}]})");
        auto t = TaskInstance::start(m);
        t.context["who"] = "bob";
        Value p = Value::map();
        p["n"] = 9;
        t.post({"go", p});
        auto s = step_task(t, {});
        REQUIRE(s.emissions.size() == 1);
        CHECK(s.emissions[0].target == Value("bob"));
        CHECK(s.emissions[0].payload.get_int("n") == 9);
        CHECK(s.emissions[0].payload.get_string("lit") == "$cash");
    }

    TEST_CASE("snapshot and restore preserve the instance")
    {
        auto m = model_of(R"({"task":"t","initial":"A","context":["x"],"states":[{"name":"A"},{"name":"B"}],
            "transitions":[{"from":"A","to":"B","trigger":"go"}]})");
        auto t = TaskInstance::start(m);
        t.context["x"] = 5;
        t.post({"go", Value::map()});
        auto r = TaskInstance::restore(m, t.snapshot());
        CHECK(r.snapshot() == t.snapshot());
        step_task(r, {});
        CHECK(r.current_state == "B");
    }
}

// Coordination between tasks of one agent, run inside a container.
TEST_SUITE("behavior")
{
    namespace rt = agentest::runtime;

    struct OneAgent {
        rt::Platform p;
        rt::Container* c = nullptr;
        std::string name;

        OneAgent(const std::vector<std::string>& docs, std::shared_ptr<ActivityRegistry> reg)
        {
            c = &p.start_container({"c1", "in-process", Bytes(32, 7), "in-process", false});
            std::vector<TaskModel> ms;
            for (const auto& d : docs)
                ms.push_back(task_model_from_json(json::parse(d)));
            c->register_behavior("b", ms, reg);
            name = c->spawn("b", Value::map(), "agent");
        }
        std::string state(const std::string& task)
        {
            std::string s;
            c->with_agent(name, [&](rt::Agent& a) { s = a.task(task)->current_state; });
            return s;
        }
    };

    TEST_CASE("sequential dependency: chained internal events")
    {
        auto reg = std::make_shared<ActivityRegistry>();
        OneAgent a({R"({"task":"first","initial":"Work","context":[],"states":[{"name":"Work"},{"name":"Done"}],
                        "transitions":[{"from":"Work","to":"Done","transmissions":[{"kind":"internal_event","target":"second","event":"go"}]}]})",
                    R"({"task":"second","initial":"Wait","context":[],"states":[{"name":"Wait"},{"name":"Done"}],
                        "transitions":[{"from":"Wait","to":"Done","trigger":"go","transmissions":[{"kind":"internal_event","target":"third","event":"go"}]}]})",
                    R"({"task":"third","initial":"Wait","context":[],"states":[{"name":"Wait"},{"name":"Done"}],
                        "transitions":[{"from":"Wait","to":"Done","trigger":"go"}]})"},
                   reg);
        a.p.tick_all();
        CHECK(a.state("first") == "Done");
        a.p.run_until_idle();
        CHECK(a.state("second") == "Done");
        CHECK(a.state("third") == "Done");
    }

    TEST_CASE("pooled dependency: join waits for every contribution")
    {
        auto reg = std::make_shared<ActivityRegistry>();
        reg->add("keep", [](const ActivityCall& c) { return c.args[0]; });
        auto producer = [](const std::string& name, const std::string& part) {
            return R"({"task":")" + name + R"(","initial":"W","context":[],"states":[{"name":"W"},{"name":"D"}],
                "transitions":[{"from":"W","to":"D","trigger":"start","transmissions":[
                  {"kind":"internal_event","target":"join","event":"part","payload":{")" + part + R"(":1}}]}]})";
        };
        OneAgent a({producer("left", "left"), producer("right", "right"),
                    R"({"task":"join","initial":"Collect","context":["l","r"],
                        "states":[{"name":"Collect"},{"name":"TakeL","activities":[{"name":"keep","params":["event.left"],"result":"l"}]},
                                  {"name":"TakeR","activities":[{"name":"keep","params":["event.right"],"result":"r"}]},{"name":"Joined"}],
                        "transitions":[{"from":"Collect","to":"TakeL","trigger":"part","guard":"event.left == 1"},
                                       {"from":"Collect","to":"TakeR","trigger":"part","guard":"event.right == 1"},
                                       {"from":"TakeL","to":"Joined","guard":"l != null && r != null"},
                                       {"from":"TakeR","to":"Joined","guard":"l != null && r != null"},
                                       {"from":"TakeL","to":"Collect","guard":"l == null || r == null"},
                                       {"from":"TakeR","to":"Collect","guard":"l == null || r == null"}]})"},
                   reg);
        a.c->post_internal_event(a.name, "left", {"start", Value::map()});
        a.p.run_until_idle();
        CHECK(a.state("join") == "Collect");
        a.c->post_internal_event(a.name, "right", {"start", Value::map()});
        a.p.run_until_idle();
        CHECK(a.state("join") == "Joined");
    }

    TEST_CASE("reciprocal dependency: two tasks exchange events")
    {
        auto reg = std::make_shared<ActivityRegistry>();
        reg->add("inc", [](const ActivityCall& c) { return Value(c.args[0].is_null() ? 1 : c.args[0].as_int() + 1); });
        OneAgent a({R"({"task":"ping","initial":"Serve","context":["n"],
                        "states":[{"name":"Serve","activities":[{"name":"inc","params":["n"],"result":"n"}]},{"name":"Wait"},{"name":"Done"}],
                        "transitions":[{"from":"Serve","to":"Wait","guard":"n < 3","transmissions":[{"kind":"internal_event","target":"pong","event":"ball"}]},
                                       {"from":"Serve","to":"Done","guard":"n >= 3"},
                                       {"from":"Wait","to":"Serve","trigger":"ball"}]})",
                    R"({"task":"pong","initial":"Wait","context":["n"],
                        "states":[{"name":"Wait"},{"name":"Hit","activities":[{"name":"inc","params":["n"],"result":"n"}]}],
                        "transitions":[{"from":"Wait","to":"Hit","trigger":"ball"},
                                       {"from":"Hit","to":"Wait","transmissions":[{"kind":"internal_event","target":"ping","event":"ball"}]}]})"},
                   reg);
        a.p.run_until_idle();
        CHECK(a.state("ping") == "Done");
        std::int64_t pongs = 0;
        a.c->with_agent(a.name, [&](rt::Agent& ag) { pongs = ag.task("pong")->context.get_int("n"); });
        CHECK(pongs == 2);
    }

    TEST_CASE("posting to an unknown task fails")
    {
        auto reg = std::make_shared<ActivityRegistry>();
        OneAgent a({R"({"task":"only","initial":"A","context":[],"states":[{"name":"A"}]})"}, reg);
        CHECK_THROWS_AS(a.c->post_internal_event(a.name, "ghost", {"e", Value::map()}), Error);
    }
}
