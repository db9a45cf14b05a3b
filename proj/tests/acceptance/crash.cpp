#include <csignal>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "acceptance.hpp"
#include "eval/engine.hpp"
#include "sim/harness.hpp"
#include "sim/scenario.hpp"
#include "store/document_store.hpp"

namespace acceptance {

using namespace agentest;
namespace fs = std::filesystem;

namespace {

void spooled_result(Outcome& out)
{
    auto sc = sim::Scenario::load(scenario("kill-sa"));
    TempDir work;
    auto b = sim::run_scenario(sc, {work.path()});
    Value v = b.value;

    int files = 0, decoded = 0;
    for (const auto& c : sc.deployment.containers) {
        auto dir = work.path() / "spool" / c.id;
        if (!fs::is_directory(dir))
            continue;
        for (const auto& f : fs::directory_iterator(dir)) {
            if (f.path().extension() != ".json")
                continue;
            ++files;
            std::ifstream in(f.path());
            std::stringstream text;
            text << in.rdbuf();
            try {
                Value doc = from_json(nlohmann::json::parse(text.str()));
                auto r = eval::TestResult::from_value(*doc.find("result"));
                const Value* session = v["sessions"].find(r.session_id);
                bool ok = session && doc.get_string("session_id") == r.session_id && r.student == "s1" &&
                          r.grade == session->get_int("grade") &&
                          static_cast<std::int64_t>(r.scores.size()) == session->get_int("answered") &&
                          r.scores.size() == 2;
                if (ok)
                    ++decoded;
                else
                    out.fail("spooled result in " + f.path().filename().string() + " does not match the session");
            } catch (const std::exception& e) {
                out.fail("spool file " + f.path().filename().string() + " unreadable: " + e.what());
            }
        }
    }
    store::DocumentStore st(work.path() / "store", std::make_shared<SimulatedClock>());
    auto stored = st.list(store::EntityKind::result).size();
    out.expect(files == 1 && decoded == 1, "exactly one spooled TestResult expected");
    out.expect(stored == 0, "the killed SA should not have stored the result");
    out.fact("kill-SA: " + std::to_string(decoded) + "/" + std::to_string(files) +
             " spool files hold the serialized TestResult, " + std::to_string(stored) + " stored");
}

// ---------------------------------------------------------------------------

struct Ack {
    std::int64_t version = 0;
    std::int64_t n = 0;
};

[[noreturn]] void writer(const fs::path& root, int fd, std::uint64_t seed)
{
    Rng rng(seed);
    try {
        store::DocumentStore st(root, std::make_shared<SimulatedClock>());
        for (std::int64_t n = 1;; ++n) {
            std::string id = "r" + std::to_string(uniform(rng, 0, 39));
            auto cur = st.find(store::EntityKind::result, id);
            Value body = Value::map();
            body["n"] = static_cast<long long>(n);
            body["pad"] = std::string(static_cast<std::size_t>(uniform(rng, 0, 8192)), 'x');
            auto version = st.put({store::EntityKind::result, id, cur ? cur->version : 0, body});
            char line[96];
            int len = std::snprintf(line, sizeof line, "%s %lld %lld\n", id.c_str(), static_cast<long long>(version),
                                    static_cast<long long>(n));
            if (write(fd, line, static_cast<std::size_t>(len)) != len)
                _exit(3);
        }
    } catch (...) {
        _exit(2);
    }
}

void restart(Outcome& out, Rng& rng)
{
    int rounds = 0, intact = 0, torn = 0;
    long acked = 0;
    for (int round = 0; round < 20; ++round) {
        TempDir dir;
        int fds[2];
        if (pipe(fds) != 0) {
            out.fail("pipe failed");
            return;
        }
        std::uint64_t seed = rng();
        std::fflush(nullptr);
        pid_t pid = fork();
        if (pid == 0) {
            close(fds[0]);
            writer(dir.path(), fds[1], seed);
        }
        close(fds[1]);
        FILE* in = fdopen(fds[0], "r");
        std::map<std::string, Ack> last;
        int kill_after = uniform(rng, 20, 300);
        char id[32];
        long long version = 0, n = 0;
        int seen = 0;
        bool killed = false;
        while (std::fscanf(in, "%31s %lld %lld", id, &version, &n) == 3) {
            last[id] = {version, n};
            if (++seen == kill_after && !killed) {
                usleep(static_cast<useconds_t>(uniform(rng, 0, 3000)));
                kill(pid, SIGKILL);
                killed = true;
            }
        }
        fclose(in);
        int status = 0;
        waitpid(pid, &status, 0);
        ++rounds;
        acked += seen;

        bool ok = killed && WIFSIGNALED(status) && WTERMSIG(status) == SIGKILL;
        try {
            store::DocumentStore st(dir.path(), std::make_shared<SimulatedClock>());
            auto all = st.list(store::EntityKind::result);
            for (const auto& [key, a] : last) {
                auto e = st.find(store::EntityKind::result, key);
                // a write that completed after the last line was read may have landed too
                ok = ok && e && (e->version > a.version || (e->version == a.version && e->body.get_int("n") == a.n));
            }
            ok = ok && all.size() >= last.size();
        } catch (const std::exception& e) {
            ok = false;
            out.fail(std::string("reopened store unreadable: ") + e.what());
        }
        for (const auto& f : fs::recursive_directory_iterator(dir.path()))
            if (f.is_regular_file() && f.path().extension() != ".json") {
                ++torn;
                break;
            }
        if (ok)
            ++intact;
        else
            out.fail("round " + std::to_string(round) + ": acknowledged writes lost after SIGKILL");
    }
    out.fact("SIGKILL restart: " + std::to_string(intact) + "/" + std::to_string(rounds) + " stores intact (" +
             std::to_string(acked) + " acknowledged writes, " + std::to_string(torn) +
             " rounds killed mid-write)");
}

} // namespace

Outcome crash_consistency(Rng& rng)
{
    Outcome out;
    spooled_result(out);
    restart(out, rng);
    return out;
}

} // namespace acceptance
