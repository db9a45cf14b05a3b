#include <doctest.h>

#include "sas/deployment.hpp"
#include "sas/fixtures.hpp"
#include "sas_support.hpp"

using namespace agentest;
using namespace agentest::sas;

using namespace test_support;

TEST_SUITE("sas")
{
    TEST_CASE("pull self-assessment runs to a result without touching the store")
    {
        TempDir dir("pull");
        Deployment d(sim_config(dir));
        auto before = d.store().count(store::EntityKind::result);

        Value start = action("start");
        start["config"]["test_id"] = "algebra-practice";
        start["config"]["count"] = 3;
        auto ack = d.wait_ack("s1", d.ui("s1", start), 5000);
        REQUIRE(ack.get_bool("ok"));
        std::string sid = ack.get_string("session_id");

        int answered = 0;
        while (true) {
            std::optional<Value> s;
            REQUIRE(d.pump([&] {
                s = session(d, "s1", sid);
                return s && (s->get_string("state") == "finished" || (s->find("question") && s->find("question")->is_map()));
            }, 10000));
            if (s->get_string("state") == "finished")
                break;
            Value a = action("answer");
            a["session_id"] = sid;
            a["answer"] = wrong_answer(*s->find("question"));
            auto r = d.wait_ack("s1", d.ui("s1", a), 5000);
            CHECK(r.get_bool("ok"));
            ++answered;
            REQUIRE(answered <= 3);
        }
        CHECK(answered == 3);
        auto s = session(d, "s1", sid);
        CHECK(s->find_path("result.status")->as_string() == "completed");
        CHECK(d.store().count(store::EntityKind::result) == before);
        CHECK(d.pump([&] { return !d.platform().directory().resolve("ea:" + sid); }, 5000));
    }
}
