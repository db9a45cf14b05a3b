#include <chrono>
#include <map>
#include <regex>
#include <set>

#include "acceptance.hpp"
#include "sas/fixtures.hpp"
#include "sim/harness.hpp"
#include "sim/scenario.hpp"
#include "store/document_store.hpp"

namespace acceptance {

using namespace agentest;

namespace {

// Declared conversation shapes over "label:sender>receiver " tokens.
const std::regex k_pull(
    "request:paa>sa (agree:sa>paa migrate:sa>paa (question:ea>paa answer:paa>ea )*result:ea>paa |refuse:sa>paa )");
const std::regex k_push("(migrate:sa>paa (question:ea>paa answer:paa>ea )*(question:ea>paa )?(close:sa>ea )?"
                        "result:ea>sa inform:sa>paa |inform:sa>paa )");

std::string tokens(const Value& entries)
{
    std::string s;
    for (const auto& e : entries.as_list())
        s += e.get_string("label") + ":" + e.get_string("sender_role") + ">" + e.get_string("receiver_role") + " ";
    return s;
}

// conversation prefix -> (conversations, matching)
std::pair<int, int> conformance(const Value& bundle, const std::string& prefix, const std::regex& re, Outcome& out)
{
    int total = 0, ok = 0;
    for (const auto& [conv, entries] : bundle.find("transcripts")->as_map()) {
        if (conv.rfind(prefix, 0) != 0)
            continue;
        ++total;
        auto t = tokens(entries);
        if (std::regex_match(t, re))
            ++ok;
        else
            out.fail(conv + " does not match: " + t);
    }
    return {total, ok};
}

// What a fresh deployment writes before anything runs: fixtures, then users not already there.
std::map<std::string, std::string> boot_store(const sim::Scenario& sc, const std::filesystem::path& dir)
{
    store::DocumentStore st(dir, std::make_shared<SimulatedClock>());
    sas::seed(sas::load_fixtures(sc.deployment.fixtures), st);
    for (const auto& u : sc.deployment.users) {
        if (st.find(store::EntityKind::user, u.id))
            continue;
        Value body = Value::map();
        body["id"] = u.id;
        body["role"] = u.role;
        st.put({store::EntityKind::user, u.id, 0, body});
    }
    return sim::tree_bytes(dir);
}

} // namespace

Outcome protocol_conformance(Rng&)
{
    Outcome out;

    {
        auto sc = sim::Scenario::load(scenario("pull"));
        TempDir work, fresh;
        auto b = sim::run_scenario(sc, {work.path()});
        Value v = b.value;
        auto [total, ok] = conformance(v, "pull:", k_pull, out);
        out.expect(total == static_cast<int>(sc.pulls.size()), "pull: one conversation per request expected");
        out.expect(total > 0 && ok == total, "pull transcripts off protocol");
        bool identical = sim::tree_bytes(work.path() / "store") == boot_store(sc, fresh.path());
        out.expect(identical, "pull changed the results store");
        out.expect(v["results"].size() == 0, "pull produced stored results");
        out.fact("pull " + std::to_string(ok) + "/" + std::to_string(total) + " conversations on protocol, store " +
                 (identical ? "byte-identical" : "changed"));
    }

    {
        auto sc = sim::Scenario::load(scenario("push"));
        TempDir work;
        auto b = sim::run_scenario(sc, {work.path()});
        Value v = b.value;
        auto [total, ok] = conformance(v, "exam:", k_push, out);
        out.expect(total > 0 && ok == total, "push transcripts off protocol");

        std::set<std::string> participants;
        for (const auto& exam : sc.pushes)
            for (const auto& [student, script] : exam.scripts)
                participants.insert(student);
        store::DocumentStore st(work.path() / "store", std::make_shared<SimulatedClock>());
        std::map<std::string, int> per_student;
        std::set<std::string> statuses;
        for (const auto& e : st.list(store::EntityKind::result)) {
            per_student[e.body.get_string("student")]++;
            statuses.insert(e.body.get_string("status"));
        }
        bool one_each = per_student.size() == participants.size();
        for (const auto& s : participants)
            one_each = one_each && per_student[s] == 1;
        out.expect(one_each, "push: not exactly one stored result per participant");
        out.expect(statuses.count("quit") && statuses.count("absent") && statuses.count("completed"),
                   "push: quit, absent and completed results expected");
        std::string st_list;
        for (const auto& s : statuses)
            st_list += (st_list.empty() ? "" : ",") + s;
        out.fact("push " + std::to_string(ok) + "/" + std::to_string(total) + " conversations on protocol, " +
                 std::to_string(per_student.size()) + " results for " + std::to_string(participants.size()) +
                 " participants (" + st_list + ")");
    }
    return out;
}

Outcome end_to_end_exam(Rng&)
{
    Outcome out;
    auto sc = sim::Scenario::load(scenario("e2e"));
    std::string first;
    double slowest = 0;
    for (int run = 0; run < 2; ++run) {
        TempDir work;
        auto t0 = std::chrono::steady_clock::now();
        auto b = sim::run_scenario(sc, {work.path()});
        slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        Value v = b.value;
        if (run == 1) {
            out.expect(b.json() == first, "second run differs from the first");
            break;
        }
        first = b.json();

        std::set<std::string> students;
        std::map<std::string, std::string> home;
        for (const auto& u : sc.deployment.users)
            if (u.role == "student") {
                students.insert(u.id);
                home[u.id] = u.container;
            }

        int migrations = 0;
        for (const auto& [conv, entries] : v["transcripts"].as_map())
            for (const auto& e : entries.as_list())
                if (e.get_string("label") == "migrate") {
                    // "ea:<exam>:<student> <from>-><to>"
                    auto s = e.get_string("summary");
                    auto agent = s.substr(0, s.find(' '));
                    auto student = agent.substr(agent.rfind(':') + 1);
                    auto to = s.substr(s.find("->") + 2);
                    if (home.count(student) && home[student] == to)
                        ++migrations;
                    else
                        out.fail("unexpected migration " + s);
                }

        int completed = 0;
        for (const auto& [id, s] : v["sessions"].as_map())
            if (s.get_string("status") == "completed" && s.get_string("state") == "finished" &&
                s.get_int("answered") == 10)
                ++completed;

        store::DocumentStore st(work.path() / "store", std::make_shared<SimulatedClock>());
        std::set<std::string> recorded;
        for (const auto& e : st.list(store::EntityKind::result))
            recorded.insert(e.body.get_string("student"));

        std::set<std::string> expected_dir{"sa", "ipa:prof"};
        for (const auto& s : students)
            expected_dir.insert("paa:" + s);
        std::set<std::string> dir;
        int eas = 0;
        for (const auto& [name, where] : v["directory"].as_map()) {
            dir.insert(name);
            eas += name.rfind("ea:", 0) == 0 ? 1 : 0;
        }

        out.expect(students.size() == 5 && sc.deployment.containers.size() == 6, "expected 1 server + 5 students");
        out.expect(migrations == 5, "5 EA migrations expected, saw " + std::to_string(migrations));
        out.expect(completed == 5, "5 completed sessions expected, saw " + std::to_string(completed));
        out.expect(recorded == students, "one stored result per student expected");
        out.expect(eas == 0, "EA entries left in the directory");
        out.expect(dir == expected_dir, "directory holds unexpected entries");
        out.expect(b.ok(), "scenario checks failed");
        out.fact(std::to_string(migrations) + " migrations, " + std::to_string(completed) + " sessions completed, " +
                 std::to_string(recorded.size()) + " results, " + std::to_string(eas) + " EAs left, directory " +
                 (dir == expected_dir ? "clean" : "dirty"));
        out.fact("simulated end t=" + std::to_string(v["final_time_ms"].as_int()) + " ms");
    }
    out.expect(slowest < 10.0, "a run took 10 s or more");
    char buf[64];
    std::snprintf(buf, sizeof buf, "2 runs byte-identical, slowest %.2f s", slowest);
    out.fact(buf);
    return out;
}

} // namespace acceptance
