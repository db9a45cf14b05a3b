#include "sim/scenario.hpp"

#include "store/files.hpp"

namespace agentest::sim {

namespace fs = std::filesystem;

AnswerStep AnswerStep::from_value(const Value& v)
{
    AnswerStep s;
    if (v.is_map()) {
        if (v.get_bool("quit")) {
            s.kind = Kind::quit;
            return s;
        }
        if (auto* c = v.find("correct"); c && c->is_bool()) {
            s.kind = c->as_bool() ? Kind::correct : Kind::wrong;
            return s;
        }
        if (auto* a = v.find("answer")) {
            s.raw = *a;
            return s;
        }
    }
    s.raw = v;
    return s;
}

namespace {

std::vector<AnswerStep> steps(const nlohmann::json& j)
{
    if (!j.is_array())
        fail(Errc::invalid_argument, "an answer script must be a list");
    std::vector<AnswerStep> out;
    for (const auto& a : j)
        out.push_back(AnswerStep::from_value(from_json(a)));
    return out;
}

const sas::UserSpec& student(const sas::DeploymentConfig& d, const std::string& id)
{
    const auto* u = d.user(id);
    if (!u || u->role != "student")
        fail(Errc::invalid_argument, "actor references unknown student '" + id + "'");
    return *u;
}

} // namespace

Scenario Scenario::from_json(const nlohmann::json& doc, const fs::path& base)
{
    if (!doc.is_object())
        fail(Errc::invalid_argument, "scenario must be a JSON object");
    Scenario s;
    try {
        s.name = doc.value("name", std::string("scenario"));
        nlohmann::json dep = nlohmann::json::object();
        dep["secret"] = doc.value("secret", std::string("sim-shared-secret-0123456789"));
        dep["server_container"] = doc.value("server_container", std::string("server"));
        dep["containers"] = doc.value("containers", nlohmann::json::array({{{"id", "server"}}}));
        dep["users"] = doc.value("users", nlohmann::json::array());
        dep["clock"] = doc.value("clock", std::string("simulated"));
        dep["tick_ms"] = doc.value("tick_ms", 50);
        dep["poll_ms"] = doc.value("poll_ms", 1000);
        dep["store"] = "store";
        if (doc.contains("fixtures"))
            dep["fixtures"] = doc["fixtures"];
        if (doc.contains("adaptive"))
            dep["adaptive"] = doc["adaptive"];
        s.deployment = sas::DeploymentConfig::from_json(dep, base);
        s.max_time_ms = doc.value("max_time_ms", s.max_time_ms);

        for (const auto& p : doc.value("pull", nlohmann::json::array())) {
            PullActor a;
            a.student = p.at("student").get<std::string>();
            a.config = agentest::from_json(p.value("config", nlohmann::json::object()));
            a.answers = steps(p.value("answers", nlohmann::json::array()));
            a.at_ms = p.value("at_ms", std::int64_t{0});
            a.think_ms = p.value("think_ms", std::int64_t{0});
            s.pulls.push_back(std::move(a));
        }
        for (const auto& p : doc.value("push", nlohmann::json::array())) {
            PushExam e;
            e.instructor = p.value("instructor", std::string{});
            e.test_id = p.at("test_id").get<std::string>();
            e.window_open = p.at("window_open").get<std::int64_t>();
            e.window_close = p.at("window_close").get<std::int64_t>();
            e.think_ms = p.value("think_ms", std::int64_t{0});
            for (const auto& [who, script] : p.at("scripts").items()) {
                if (script.is_null())
                    e.scripts[who] = std::nullopt;
                else
                    e.scripts[who] = steps(script);
            }
            s.pushes.push_back(std::move(e));
        }
        for (const auto& f : doc.value("faults", nlohmann::json::array())) {
            Fault x;
            x.kill_container = f.value("kill_container", std::string{});
            if (f.contains("at_ms"))
                x.at_ms = f["at_ms"].get<std::int64_t>();
            if (f.contains("after_answers"))
                x.after_answers = f["after_answers"].get<std::size_t>();
            x.drop_label = f.value("drop_label", std::string{});
            x.drop_count = f.value("count", 1);
            if (x.kill_container.empty() == x.drop_label.empty())
                fail(Errc::invalid_argument, "a fault is either kill_container or drop_label");
            if (!x.kill_container.empty() && !x.at_ms && !x.after_answers)
                fail(Errc::invalid_argument, "kill_container needs at_ms or after_answers");
            s.faults.push_back(std::move(x));
        }
        s.expect = agentest::from_json(doc.value("expect", nlohmann::json::object()));
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, std::string("scenario: ") + e.what());
    }

    s.deployment.validate();
    for (const auto& p : s.pulls)
        student(s.deployment, p.student);
    for (auto& e : s.pushes) {
        if (e.scripts.empty())
            fail(Errc::invalid_argument, "push exam on '" + e.test_id + "' enrolls nobody");
        for (const auto& [who, _] : e.scripts)
            student(s.deployment, who);
        if (e.instructor.empty())
            for (const auto& u : s.deployment.users)
                if (u.role == "instructor" || u.role == "admin") {
                    e.instructor = u.id;
                    break;
                }
        const auto* u = s.deployment.user(e.instructor);
        if (!u || u->role == "student")
            fail(Errc::invalid_argument, "push exam needs an instructor; '" + e.instructor + "' is not one");
    }
    for (const auto& f : s.faults)
        if (!f.kill_container.empty()) {
            bool known = false;
            for (const auto& c : s.deployment.containers)
                known = known || c.id == f.kill_container;
            if (!known)
                fail(Errc::invalid_argument, "fault names unknown container '" + f.kill_container + "'");
        }
    return s;
}

Scenario Scenario::load(const fs::path& file)
{
    auto text = store::read_file(file);
    if (!text)
        fail(Errc::invalid_argument, "scenario file '" + file.string() + "' not found");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(*text);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, file.string() + ": " + e.what());
    }
    return from_json(doc, file.parent_path());
}

} // namespace agentest::sim
