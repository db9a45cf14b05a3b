#include "sas/fixtures.hpp"

#include <algorithm>
#include <set>

#include "eval/engine.hpp"
#include "sas/protocol.hpp"
#include "store/files.hpp"

namespace agentest::sas {

using store::Entity;
using store::EntityKind;

namespace fs = std::filesystem;

std::map<EntityKind, std::int64_t> FixtureSet::counts() const
{
    std::map<EntityKind, std::int64_t> out;
    for (auto k : store::k_all_kinds)
        out[k] = 0;
    for (const auto& e : entities)
        ++out[e.kind];
    return out;
}

Value counts_value(const std::map<EntityKind, std::int64_t>& counts)
{
    Value v = Value::map();
    for (auto k : store::k_all_kinds) {
        auto it = counts.find(k);
        v[std::string(store::to_string(k))] = it == counts.end() ? 0 : it->second;
    }
    return v;
}

namespace {

std::vector<fs::path> json_files(const fs::path& dir)
{
    std::vector<fs::path> out;
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        return out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json")
            out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

[[noreturn]] void schema_fail(const fs::path& file, const fs::path& root, const std::string& what)
{
    fail(Errc::schema_error, fs::relative(file, root).generic_string() + ": " + what);
}

Value read_json(const fs::path& file, const fs::path& root)
{
    auto text = store::read_file(file);
    if (!text)
        schema_fail(file, root, "cannot be read");
    try {
        return from_json(nlohmann::json::parse(*text));
    } catch (const nlohmann::json::exception& e) {
        schema_fail(file, root, std::string("not valid JSON (") + e.what() + ")");
    }
}

void check_id(const std::string& id, const fs::path& file, const fs::path& root)
{
    try {
        store::check_entity_id(id);
    } catch (const Error& e) {
        schema_fail(file, root, "field 'id': " + e.detail());
    }
}

std::string join(const std::vector<std::string>& v)
{
    std::string s;
    for (const auto& x : v)
        s += (s.empty() ? "" : "; ") + x;
    return s;
}

} // namespace

FixtureSet load_fixtures(const fs::path& dir)
{
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        fail(Errc::invalid_argument, "fixture directory '" + dir.string() + "' does not exist");
    FixtureSet set;
    eval::QuestionBank bank;
    std::set<std::string> ids[6];
    auto unique = [&](EntityKind k, const std::string& id, const fs::path& f) {
        if (!ids[static_cast<int>(k)].insert(id).second)
            schema_fail(f, dir, std::string(store::to_string(k)) + " id '" + id + "' appears twice");
    };

    for (const auto& f : json_files(dir / "questions")) {
        Value doc = read_json(f, dir);
        if (!doc.is_map())
            schema_fail(f, dir, "must hold an object");
        eval::Question q;
        eval::ExpertAnswer a;
        try {
            q = eval::question_from_value(doc);
            const Value* ans = doc.find("answer");
            if (!ans || !ans->is_map())
                fail(Errc::schema_error, "field 'answer' must be an object");
            a = eval::expert_answer_from_value(*ans, q.id);
        } catch (const Error& e) {
            schema_fail(f, dir, e.detail());
        }
        check_id(q.id, f, dir);
        unique(EntityKind::question, q.id, f);
        auto issues = eval::validate_question(q, &a);
        if (!issues.empty())
            schema_fail(f, dir, join(issues));
        set.entities.push_back({EntityKind::question, q.id, 0, eval::to_value(q)});
        set.entities.push_back({EntityKind::expert_answer, q.id, 0, eval::to_value(a)});
        bank.questions.emplace(q.id, q);
        bank.answers.emplace(q.id, a);
    }

    for (const auto& f : json_files(dir / "tests")) {
        Value doc = read_json(f, dir);
        eval::Test t;
        try {
            t = eval::test_from_value(doc);
        } catch (const Error& e) {
            schema_fail(f, dir, e.detail());
        }
        check_id(t.id, f, dir);
        unique(EntityKind::test, t.id, f);
        auto issues = eval::validate_test(t);
        if (!issues.empty())
            schema_fail(f, dir, join(issues));
        try {
            eval::compile_engine(t, bank);
        } catch (const Error& e) {
            schema_fail(f, dir, e.detail());
        }
        set.entities.push_back({EntityKind::test, t.id, 0, eval::to_value(t)});
    }

    for (const auto& f : json_files(dir / "users")) {
        Value u = read_json(f, dir);
        std::string id = u.get_string("id");
        std::string role = u.get_string("role");
        if (id.empty())
            schema_fail(f, dir, "missing field 'id'");
        if (role != "student" && role != "instructor" && role != "admin")
            schema_fail(f, dir, "field 'role' must be student, instructor or admin");
        check_id(id, f, dir);
        unique(EntityKind::user, id, f);
        Value body = Value::map();
        body["id"] = id;
        body["role"] = role;
        if (auto n = u.get_string("name"); !n.empty())
            body["name"] = n;
        set.entities.push_back({EntityKind::user, id, 0, body});
    }

    for (const auto& f : json_files(dir / "schedules")) {
        Value doc = read_json(f, dir);
        ExamSchedule s;
        try {
            s = ExamSchedule::from_value(doc);
            s.validate();
        } catch (const Error& e) {
            schema_fail(f, dir, e.detail());
        }
        check_id(s.exam_id, f, dir);
        unique(EntityKind::schedule, s.exam_id, f);
        if (!ids[static_cast<int>(EntityKind::test)].contains(s.test_id))
            schema_fail(f, dir, "field 'test_id': no test '" + s.test_id + "' among the fixtures");
        set.entities.push_back({EntityKind::schedule, s.exam_id, 0, s.to_value()});
    }
    return set;
}

std::map<EntityKind, std::int64_t> seed(const FixtureSet& set, store::DocumentStore& store)
{
    for (auto e : set.entities) {
        auto cur = store.find(e.kind, e.id);
        e.version = cur ? cur->version : 0;
        store.put(e);
    }
    return set.counts();
}

} // namespace agentest::sas
