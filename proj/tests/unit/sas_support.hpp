#pragma once

#include <optional>
#include <string>

#include "sas/deployment.hpp"
#include "support.hpp"

namespace test_support {

inline agentest::sas::DeploymentConfig sim_config(const TempDir& dir, int students = 1)
{
    agentest::sas::DeploymentConfig c;
    c.secret = "0123456789abcdef-secret";
    c.containers.push_back({"server", "in-process", "in-process", false, {}});
    for (int i = 1; i <= students; ++i)
        c.containers.push_back({"host" + std::to_string(i), "in-process", "in-process", false, {}});
    for (int i = 1; i <= students; ++i)
        c.users.push_back({"s" + std::to_string(i), "student", "pw", "host" + std::to_string(i)});
    c.users.push_back({"prof", "instructor", "pw", "server"});
    c.users.push_back({"prof2", "instructor", "pw", "server"});
    c.users.push_back({"root", "admin", "pw", "server"});
    c.store = dir / "store";
    c.spool = dir / "spool";
    c.fixtures = k_source_dir / "fixtures/sample";
    c.simulated_clock = true;
    c.tick_ms = 50;
    return c;
}

inline agentest::Value action(const char* name)
{
    auto v = agentest::Value::map();
    v["action"] = name;
    return v;
}

inline std::optional<agentest::Value> session(agentest::sas::Deployment& d, const std::string& user,
                                              const std::string& sid)
{
    auto desk = d.desk(user);
    if (!desk)
        return std::nullopt;
    auto* s = desk->find_path("sessions." + sid);
    return s ? std::optional<agentest::Value>(*s) : std::nullopt;
}

// An answer of the right shape that the sample bank marks wrong.
inline agentest::Value wrong_answer(const agentest::Value& question)
{
    std::string type = question.get_string("type");
    if (type == "numeric")
        return -12345;
    if (type == "multi_choice")
        return agentest::Value::list();
    if (type == "single_choice")
        return "zz";
    return "nonsense";
}

} // namespace test_support
