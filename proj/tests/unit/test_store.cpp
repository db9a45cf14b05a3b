#include <doctest.h>

#include <fstream>
#include <random>
#include <thread>

#include "store/document_store.hpp"
#include "store/files.hpp"
#include "support.hpp"

using namespace agentest;
using namespace agentest::store;
using test_support::TempDir;

namespace {

Entity result(const std::string& id, const std::string& student)
{
    Entity e{EntityKind::result, id, 0, Value::map()};
    e.body["student"] = student;
    e.body["grade"] = 50;
    return e;
}

} // namespace

TEST_SUITE("store")
{
    TEST_CASE("create, get, update, conflict")
    {
        TempDir dir("store");
        DocumentStore s(dir.path());
        Entity e{EntityKind::test, "t1", 0, Value::map()};
        e.body["title"] = "A";
        CHECK(s.put(e) == 1);
        auto got = s.get(EntityKind::test, "t1");
        CHECK(got.version == 1);
        CHECK(got.body == e.body);
        CHECK_THROWS_AS(s.put(e), VersionConflict);
        e.version = 1;
        e.body["title"] = "B";
        CHECK(s.put(e) == 2);
        try {
            s.put(e);
            FAIL("expected conflict");
        } catch (const VersionConflict& c) {
            CHECK(c.current() == 2);
        }
        CHECK(std::filesystem::exists(dir / "test/t1.json"));
    }

    TEST_CASE("100 sequential updates reach version 101")
    {
        TempDir dir("store");
        DocumentStore s(dir.path());
        Entity e{EntityKind::question, "q", 0, Value::map()};
        e.version = s.put(e);
        for (int i = 0; i < 100; ++i) {
            e.body["i"] = i;
            e.version = s.put(e);
        }
        CHECK(s.get(EntityKind::question, "q").version == 101);
    }

    TEST_CASE("missing and deleted entities")
    {
        TempDir dir("store");
        DocumentStore s(dir.path());
        CHECK_THROWS_AS(s.get(EntityKind::test, "nope"), Error);
        CHECK_THROWS_AS(s.remove(EntityKind::test, "nope"), Error);
        s.put(result("r1", "a"));
        s.remove(EntityKind::result, "r1");
        CHECK_FALSE(s.find(EntityKind::result, "r1"));
        CHECK(s.list(EntityKind::result).empty());
    }

    TEST_CASE("list filters and orders by id")
    {
        TempDir dir("store");
        DocumentStore s(dir.path());
        CHECK(s.list(EntityKind::result).empty());
        int n = 0;
        for (const char* st : {"s3", "s1", "s2", "s1", "s3", "s1"})
            s.put(result("r" + std::to_string(9 - n++), st));
        std::size_t total = 0;
        for (const char* st : {"s1", "s2", "s3"}) {
            auto rows = s.list(EntityKind::result, {{"student", Value(st)}});
            for (const auto& r : rows)
                CHECK(r.body.get_string("student") == st);
            total += rows.size();
        }
        CHECK(total == 6);
        auto all = s.list(EntityKind::result);
        CHECK(all.size() == 6);
        CHECK(std::is_sorted(all.begin(), all.end(), [](auto& a, auto& b) { return a.id < b.id; }));
    }

    TEST_CASE("a test under an open schedule cannot be deleted")
    {
        TempDir dir("store");
        auto clock = std::make_shared<SimulatedClock>(1000);
        DocumentStore s(dir.path(), clock);
        s.put({EntityKind::test, "mid", 0, Value::map()});
        Entity sched{EntityKind::schedule, "exam-1", 0, Value::map()};
        sched.body["test_id"] = "mid";
        sched.body["window_open"] = 0;
        sched.body["window_close"] = 5000;
        s.put(sched);
        try {
            s.remove(EntityKind::test, "mid");
            FAIL("expected referential-in-use");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::referential_in_use);
        }
        clock->set(6000);
        s.remove(EntityKind::test, "mid");
        CHECK_FALSE(s.find(EntityKind::test, "mid"));
    }

    TEST_CASE("randomized bodies round-trip through a reopen")
    {
        TempDir dir("store");
        std::mt19937 rng(7);
        std::map<std::string, Value> written;
        {
            DocumentStore s(dir.path());
            for (int i = 0; i < 50; ++i) {
                Value b = Value::map();
                b["n"] = static_cast<std::int64_t>(rng() % 100000) - 50000;
                b["x"] = static_cast<double>(rng() % 1000) / 8.0;
                b["s"] = std::string(rng() % 20, static_cast<char>('a' + rng() % 26));
                b["l"] = Value(Value::List{true, nullptr, "z"});
                std::string id = "e" + std::to_string(i);
                s.put({EntityKind::user, id, 0, b});
                written[id] = b;
            }
        }
        DocumentStore again(dir.path());
        for (const auto& [id, b] : written)
            CHECK(again.get(EntityKind::user, id).body == b);
    }

    TEST_CASE("byte leaves are stored as base64 text")
    {
        TempDir dir("store");
        DocumentStore s(dir.path());
        Value b = Value::map();
        b["y"] = Bytes{1, 0, 255};
        s.put({EntityKind::user, "u", 0, b});
        CHECK(s.get(EntityKind::user, "u").body.get_string("y") == "AQD/");
    }

    TEST_CASE("concurrent updates serialize")
    {
        TempDir dir("store");
        DocumentStore s(dir.path());
        s.put({EntityKind::test, "c", 0, Value::map()});
        std::atomic<int> ok{0};
        std::vector<std::thread> ts;
        for (int t = 0; t < 4; ++t)
            ts.emplace_back([&] {
                for (int i = 0; i < 25; ++i) {
                    while (true) {
                        auto cur = s.get(EntityKind::test, "c");
                        try {
                            s.put(cur);
                            ++ok;
                            break;
                        } catch (const VersionConflict&) {
                        }
                    }
                }
            });
        for (auto& t : ts)
            t.join();
        CHECK(ok == 100);
        CHECK(s.get(EntityKind::test, "c").version == 101);
    }

    TEST_CASE("ids are checked")
    {
        CHECK_NOTHROW(check_entity_id("exam-1_a.b"));
        CHECK_THROWS_AS(check_entity_id(""), Error);
        CHECK_THROWS_AS(check_entity_id("../x"), Error);
        CHECK_THROWS_AS(check_entity_id("a/b"), Error);
    }

    TEST_CASE("atomic write leaves no temp files")
    {
        TempDir dir("store");
        write_file_atomic(dir / "a/b.txt", "one");
        write_file_atomic(dir / "a/b.txt", "two");
        CHECK(read_file(dir / "a/b.txt") == std::optional<std::string>("two"));
        CHECK_FALSE(read_file(dir / "a/none.txt"));
        int files = 0;
        for ([[maybe_unused]] auto& e : std::filesystem::directory_iterator(dir / "a"))
            ++files;
        CHECK(files == 1);
    }
}
