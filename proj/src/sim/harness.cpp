#include "sim/harness.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <thread>

#include "core/log.hpp"
#include "runtime/frame.hpp"
#include "sas/spool.hpp"
#include "sim/transcript.hpp"
#include "store/files.hpp"

namespace agentest::sim {

namespace fs = std::filesystem;
using store::EntityKind;

bool Bundle::ok() const
{
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
}

std::string Bundle::json() const
{
    return to_json(value).dump(2) + "\n";
}

std::map<std::string, std::string> tree_bytes(const fs::path& root)
{
    std::map<std::string, std::string> out;
    std::error_code ec;
    if (!fs::is_directory(root, ec))
        return out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file())
            out[fs::relative(e.path(), root).generic_string()] = store::read_file(e.path()).value_or("");
    return out;
}

namespace {

class WorkDir {
public:
    explicit WorkDir(fs::path given) : path_(std::move(given))
    {
        if (path_.empty()) {
            std::random_device rd;
            path_ = fs::temp_directory_path() / ("agentest-sim-" + std::to_string(rd()) + std::to_string(rd()));
            owned_ = true;
        }
    }
    ~WorkDir()
    {
        if (owned_)
            store::remove_tree(path_);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
    bool owned_ = false;
};

Value synthesize(const eval::QuestionBank& bank, const Value& question, bool correct)
{
    std::string id = question.get_string("id");
    auto a = bank.answers.find(id);
    auto q = bank.questions.find(id);
    if (a == bank.answers.end() || q == bank.questions.end())
        return Value{};
    const auto& ans = a->second;
    switch (q->second.type) {
    case eval::QuestionType::single_choice:
        if (correct)
            return ans.option;
        for (const auto& o : q->second.options)
            if (o.id != ans.option)
                return o.id;
        return Value{};
    case eval::QuestionType::multi_choice: {
        Value l = Value::list();
        for (const auto& o : q->second.options)
            if (ans.options.contains(o.id) == correct)
                l.push_back(o.id);
        return l;
    }
    case eval::QuestionType::numeric: {
        double v = correct ? ans.value : ans.value + ans.tolerance + 1000;
        if (v == static_cast<double>(static_cast<std::int64_t>(v)))
            return static_cast<std::int64_t>(v);
        return v;
    }
    case eval::QuestionType::short_answer:
        return correct ? Value(ans.phrases.front()) : Value("zzz unrelated words");
    }
    return Value{};
}

struct Actor {
    std::string student;
    bool pull = true;
    std::string session_id;
    std::optional<std::vector<AnswerStep>> script;
    std::size_t next = 0;
    std::int64_t at_ms = 0;
    std::int64_t think_ms = 0;
    Value config;

    enum class Phase { waiting, running, done } phase = Phase::waiting;
    std::string pending_ui;
    bool pending_start = false;
    std::int64_t seen_at = -1;
    Value last_ack;
    std::vector<std::string> notes;
};

class Run {
public:
    Run(const Scenario& sc, const fs::path& dir) : sc_(sc), dir_(dir)
    {
        auto cfg = sc.deployment;
        cfg.store = dir / "store";
        cfg.spool = dir / "spool";
        for (auto& c : cfg.containers)
            c.spool_dir = cfg.spool / c.id;
        d_ = std::make_unique<sas::Deployment>(std::move(cfg));
        rec_ = std::make_unique<TranscriptRecorder>(d_->platform().clock());
        d_->platform().add_observer(rec_.get());
        bank_ = sas::load_bank(d_->store());
        install_drops();
    }

    ~Run()
    {
        if (d_) {
            d_->stop();
            d_->platform().remove_observer(rec_.get());
        }
    }

    Bundle execute();

private:
    void install_drops();
    void schedule_exams();
    bool poll(Actor& a);
    void apply_faults();
    bool finished();
    Value sessions();

    const Scenario& sc_;
    fs::path dir_;
    std::unique_ptr<sas::Deployment> d_;
    std::unique_ptr<TranscriptRecorder> rec_;
    eval::QuestionBank bank_;
    std::vector<Actor> actors_;
    std::vector<std::string> exam_ids_;
    std::vector<bool> fault_done_;
    std::set<std::string> killed_;
    std::vector<Check> setup_failures_;
    std::int64_t t0_ = 0;
};

void Run::install_drops()
{
    auto drops = std::make_shared<std::map<std::string, int>>();
    for (const auto& f : sc_.faults)
        if (!f.drop_label.empty())
            (*drops)[f.drop_label] += f.drop_count;
    if (drops->empty())
        return;
    Bytes secret(sc_.deployment.secret.begin(), sc_.deployment.secret.end());
    d_->platform().network().set_interceptor([drops, secret](const std::string&, Bytes& frame) {
        try {
            auto f = runtime::decode_frame(frame, secret);
            if (f.kind != runtime::FrameKind::message)
                return true;
            auto m = runtime::Message::from_value(f.body);
            auto it = drops->find(m.label());
            if (it == drops->end() || it->second <= 0)
                return true;
            --it->second;
            return false;
        } catch (const Error&) {
            return true;
        }
    });
}

void Run::schedule_exams()
{
    const std::int64_t patience = 60000;
    for (const auto& e : sc_.pushes) {
        Value act = Value::map();
        act["action"] = "schedule";
        act["op"] = "create";
        Value s = Value::map();
        s["test_id"] = e.test_id;
        s["window_open"] = e.window_open;
        s["window_close"] = e.window_close;
        Value enrolled = Value::list();
        for (const auto& [who, _] : e.scripts)
            enrolled.push_back(who);
        s["enrolled"] = enrolled;
        act["schedule"] = s;
        std::string exam_id;
        try {
            auto ack = d_->wait_ack(e.instructor, d_->ui(e.instructor, act), patience);
            if (!ack.get_bool("ok"))
                fail(Errc::refused, ack.get_string("code") + ": " + ack.get_string("detail"));
            std::string conv = ack.get_string("conversation");
            std::optional<Value> reply;
            d_->pump([&] {
                auto desk = d_->desk(e.instructor);
                if (auto* r = desk ? desk->find_path("replies." + conv) : nullptr)
                    reply = *r;
                return reply.has_value();
            }, patience);
            if (!reply)
                fail(Errc::timeout, "no reply to the exam schedule");
            if (!reply->get_bool("ok"))
                fail(Errc::refused, reply->get_string("code") + ": " + reply->get_string("detail"));
            exam_id = reply->get_string("exam_id");
        } catch (const Error& err) {
            setup_failures_.push_back({"schedule:" + e.test_id, false, err.what()});
            continue;
        }
        exam_ids_.push_back(exam_id);
        for (const auto& [who, script] : e.scripts) {
            Actor a;
            a.student = who;
            a.pull = false;
            a.session_id = sas::push_session(exam_id, who);
            a.script = script;
            a.think_ms = e.think_ms;
            a.phase = Actor::Phase::running;
            actors_.push_back(std::move(a));
        }
    }
}

bool Run::poll(Actor& a)
{
    if (a.phase == Actor::Phase::done)
        return false;
    const std::int64_t now = d_->platform().clock().now_ms() - t0_;
    if (!a.pending_ui.empty()) {
        auto ack = d_->ack(a.student, a.pending_ui);
        if (!ack)
            return false;
        a.pending_ui.clear();
        a.last_ack = *ack;
        if (!ack->get_bool("ok"))
            a.notes.push_back(ack->get_string("code"));
        if (a.pending_start) {
            a.pending_start = false;
            if (!ack->get_bool("ok")) {
                a.phase = Actor::Phase::done;
                return true;
            }
            a.session_id = ack->get_string("session_id");
            a.phase = Actor::Phase::running;
        }
        return true;
    }
    if (a.phase == Actor::Phase::waiting) {
        if (now < a.at_ms)
            return false;
        Value act = Value::map();
        act["action"] = "start";
        act["config"] = a.config;
        a.pending_ui = d_->ui(a.student, act);
        a.pending_start = true;
        return true;
    }

    auto desk = d_->desk(a.student);
    const Value* s = desk ? desk->find_path("sessions." + a.session_id) : nullptr;
    if (!s)
        return false;
    std::string state = s->get_string("state");
    if (state == "finished" || state == "refused" || state == "failed") {
        a.phase = Actor::Phase::done;
        return true;
    }
    const Value* q = s->find("question");
    if (!q || !q->is_map()) {
        a.seen_at = -1;
        return false;
    }
    if (!a.script)
        return false; // absent student
    if (a.seen_at < 0)
        a.seen_at = now;
    if (now - a.seen_at < a.think_ms)
        return false;

    Value act = Value::map();
    act["session_id"] = a.session_id;
    if (a.next >= a.script->size()) {
        if (!a.pull)
            return false; // waits for the window to close
        act["action"] = "quit";
    } else {
        const auto& step = (*a.script)[a.next++];
        switch (step.kind) {
        case AnswerStep::Kind::quit:
            act["action"] = "quit";
            break;
        case AnswerStep::Kind::correct:
        case AnswerStep::Kind::wrong:
            act["action"] = "answer";
            act["answer"] = synthesize(bank_, *q, step.kind == AnswerStep::Kind::correct);
            break;
        case AnswerStep::Kind::raw:
            act["action"] = "answer";
            act["answer"] = step.raw;
            break;
        }
        if (act.get_string("action") == "answer")
            act["question_id"] = q->get_string("id");
    }
    a.pending_ui = d_->ui(a.student, act);
    a.seen_at = -1;
    return true;
}

void Run::apply_faults()
{
    const std::int64_t now = d_->platform().clock().now_ms() - t0_;
    for (std::size_t i = 0; i < sc_.faults.size(); ++i) {
        const auto& f = sc_.faults[i];
        if (fault_done_[i] || f.kill_container.empty())
            continue;
        bool due = (f.at_ms && now >= *f.at_ms) || (f.after_answers && rec_->count("answer", "ea") >= *f.after_answers);
        if (!due)
            continue;
        fault_done_[i] = true;
        d_->platform().kill_container(f.kill_container);
        killed_.insert(f.kill_container);
        log().info("sim: killed container '{}' at t={}", f.kill_container, now);
    }
}

bool Run::finished()
{
    for (const auto& a : actors_)
        if (a.phase != Actor::Phase::done)
            return false;
    for (const auto& [agent, _] : d_->platform().directory().entries())
        if (sas::role_of(agent) == "ea")
            return false;
    if (killed_.contains(sc_.deployment.server_container))
        return true;
    for (const auto& id : exam_ids_) {
        auto e = d_->store().find(EntityKind::schedule, id);
        if (e && !e->body.get_bool("closed"))
            return false;
    }
    return true;
}

Value Run::sessions()
{
    Value out = Value::map();
    for (const auto& a : actors_) {
        Value v = Value::map();
        v["student"] = a.student;
        v["kind"] = a.pull ? "pull" : "push";
        v["notes"] = Value::list();
        for (const auto& n : a.notes)
            v["notes"].push_back(n);
        if (a.session_id.empty()) {
            v["state"] = "not-started";
            v["ack"] = a.last_ack;
            out[a.student + ":unstarted"] = v;
            continue;
        }
        auto desk = d_->desk(a.student);
        const Value* s = desk ? desk->find_path("sessions." + a.session_id) : nullptr;
        v["state"] = s ? s->get_string("state") : std::string("unknown");
        if (s) {
            if (auto* r = s->find("result"); r && r->is_map()) {
                v["status"] = r->get_string("status");
                v["grade"] = r->get_int("grade");
                v["answered"] = r->get_int("answered");
            }
            if (auto* err = s->find("error"); err && err->is_map())
                v["error"] = *err;
        }
        out[a.session_id] = v;
    }
    return out;
}

Value store_snapshot(const store::DocumentStore& st)
{
    Value out = Value::map();
    for (auto k : store::k_all_kinds) {
        Value kind = Value::map();
        for (const auto& e : st.list(k)) {
            Value v = Value::map();
            v["version"] = e.version;
            v["body"] = e.body;
            kind[e.id] = v;
        }
        out[std::string(store::to_string(k))] = kind;
    }
    return out;
}

Bundle Run::execute()
{
    Bundle b;
    fault_done_.assign(sc_.faults.size(), false);
    const fs::path store_root = d_->config().store;
    const auto store_before = tree_bytes(store_root);
    const auto results_before = d_->store().count(EntityKind::result);
    auto& clock = d_->platform().clock();
    const bool simulated = clock.simulated();
    t0_ = clock.now_ms();
    d_->start();

    schedule_exams();
    for (const auto& p : sc_.pulls) {
        Actor a;
        a.student = p.student;
        a.script = p.answers;
        a.at_ms = p.at_ms;
        a.think_ms = p.think_ms;
        a.config = p.config;
        actors_.push_back(std::move(a));
    }

    bool in_time = true;
    while (true) {
        apply_faults();
        bool acted = false;
        for (auto& a : actors_)
            acted = poll(a) || acted;
        if (!acted && finished())
            break;
        if (clock.now_ms() - t0_ > sc_.max_time_ms) {
            in_time = false;
            break;
        }
        if (simulated)
            d_->step();
        else
            std::this_thread::sleep_for(std::chrono::milliseconds(1));
    }
    d_->stop();

    // --- bundle
    auto convs = rec_->conversations();
    Value transcripts = Value::map();
    for (const auto& [conv, entries] : convs) {
        Value l = Value::list();
        for (const auto& e : entries)
            l.push_back(e.to_value());
        transcripts[conv] = l;
    }
    Value results = Value::list();
    for (const auto& e : d_->store().list(EntityKind::result))
        results.push_back(e.body);
    Value directory = Value::map();
    for (const auto& [agent, container] : d_->platform().directory().entries())
        directory[agent] = container;
    Value spool = Value::list();
    std::size_t spooled = 0;
    for (const auto& c : d_->config().containers)
        for (const auto& r : sas::read_spool(d_->config().spool / c.id)) {
            Value v = Value::map();
            v["container"] = c.id;
            v["session_id"] = r.session_id;
            v["result"] = r.result;
            spool.push_back(v);
            ++spooled;
        }

    // --- checks
    auto& checks = b.checks;
    for (const auto& f : setup_failures_)
        checks.push_back(f);
    checks.push_back({"finished-in-time", in_time,
                      "t=" + std::to_string(clock.now_ms() - t0_) + " limit=" + std::to_string(sc_.max_time_ms)});
    if (sc_.expect.get_bool("protocol", true))
        for (const auto& [conv, entries] : convs)
            if (pattern_for(conv))
                checks.push_back({"protocol " + conv, matches_protocol(conv, entries), token_string(entries)});
    if (sc_.pushes.empty()) {
        bool same = tree_bytes(store_root) == store_before;
        checks.push_back({"pull-store-unchanged", same, same ? "byte-identical" : "store files changed"});
    }
    if (sc_.expect.get_bool("push_results", true))
        for (const auto& id : exam_ids_) {
            auto rows = d_->store().list(EntityKind::result, {{"exam_id", Value(id)}});
            std::map<std::string, int> per;
            for (const auto& r : rows)
                ++per[r.body.get_string("student")];
            std::size_t enrolled = 0;
            bool ok = true;
            if (auto sched = d_->store().find(EntityKind::schedule, id))
                for (const auto& st : sas::ExamSchedule::from_value(sched->body).enrolled) {
                    ++enrolled;
                    ok = ok && per[st] == 1;
                }
            ok = ok && rows.size() == enrolled;
            checks.push_back({"push-results " + id, ok,
                              std::to_string(rows.size()) + " result(s) for " + std::to_string(enrolled) + " enrolled"});
        }
    {
        std::string left;
        for (const auto& [agent, _] : d_->platform().directory().entries())
            if (sas::role_of(agent) == "ea")
                left += agent + " ";
        checks.push_back({"eas-terminated", left.empty(), left.empty() ? "no ea entries" : left});
    }
    {
        store::DocumentStore reopened(store_root, d_->platform().clock_ptr());
        bool same = store_snapshot(reopened) == store_snapshot(d_->store());
        checks.push_back({"store-reopen", same, same ? "identical after reopen" : "reopened store differs"});
    }
    if (auto* n = sc_.expect.find("results_added"); n && n->is_int()) {
        auto added = static_cast<std::int64_t>(d_->store().count(EntityKind::result) - results_before);
        checks.push_back({"results-added", added == n->as_int(), std::to_string(added)});
    }
    if (auto* n = sc_.expect.find("spooled"); n && n->is_int())
        checks.push_back({"spooled", static_cast<std::int64_t>(spooled) == n->as_int(), std::to_string(spooled)});
    Value sess = sessions();
    for (auto [key, field] : {std::pair{"statuses", "status"}, {"grades", "grade"}, {"states", "state"}}) {
        auto* want = sc_.expect.find(key);
        if (!want || !want->is_map())
            continue;
        for (const auto& [sid, value] : want->as_map()) {
            const Value* got = sess.find(sid) ? sess.find(sid)->find(field) : nullptr;
            bool ok = got && *got == value;
            checks.push_back({std::string(field) + " " + sid, ok, got ? got->debug_string() : "missing"});
        }
    }

    Value checks_v = Value::list();
    for (const auto& c : checks) {
        Value v = Value::map();
        v["name"] = c.name;
        v["ok"] = c.ok;
        v["detail"] = c.detail;
        checks_v.push_back(v);
    }
    Value& out = b.value;
    out = Value::map();
    out["scenario"] = sc_.name;
    out["final_time_ms"] = clock.now_ms() - t0_;
    out["transcripts"] = transcripts;
    out["sessions"] = sess;
    out["results"] = results;
    out["store"] = store_snapshot(d_->store());
    out["directory"] = directory;
    out["spool"] = spool;
    out["checks"] = checks_v;
    out["ok"] = b.ok();
    return b;
}

} // namespace

Bundle run_scenario(const Scenario& scenario, const RunOptions& options)
{
    WorkDir dir(options.work_dir);
    Run run(scenario, dir.path());
    return run.execute();
}

} // namespace agentest::sim
