#include "runtime/agent.hpp"

#include "core/error.hpp"
#include "core/log.hpp"

namespace agentest::runtime {

behavior::ModelPtr Behavior::task(std::string_view name) const
{
    for (const auto& t : tasks)
        if (t->name() == name)
            return t;
    return nullptr;
}

Agent Agent::create(const Behavior& b, std::string name, std::string home, Value init)
{
    Agent a;
    a.name = std::move(name);
    a.behavior_id = b.id;
    a.home = std::move(home);
    a.data = init.is_map() ? std::move(init) : Value::map();
    for (const auto& m : b.tasks)
        a.tasks.push_back(behavior::TaskInstance::start(m));
    return a;
}

namespace {

std::string dedupe_key(const std::string& sender, const std::string& conversation)
{
    return sender + '\x1f' + conversation;
}

Value event_value(const behavior::Event& e)
{
    Value v = Value::map();
    v["name"] = e.name;
    v["payload"] = e.payload;
    return v;
}

behavior::Event event_from(const Value& v)
{
    auto* p = v.find("payload");
    return {v.get_string("name"), p ? *p : Value::map()};
}

} // namespace

Value Agent::snapshot() const
{
    Value v = Value::map();
    v["name"] = name;
    v["behavior"] = behavior_id;
    v["home"] = home;
    v["data"] = data;
    Value ts = Value::list();
    for (const auto& t : tasks)
        ts.push_back(t.snapshot());
    v["tasks"] = std::move(ts);
    Value mb = Value::list();
    for (const auto& m : mailbox)
        mb.push_back(m.to_value());
    v["mailbox"] = std::move(mb);
    Value seen = Value::map();
    for (const auto& [k, s] : last_seen)
        seen[k] = s;
    v["last_seen"] = std::move(seen);
    Value seq = Value::map();
    for (const auto& [k, s] : next_seq)
        seq[k] = s;
    v["next_seq"] = std::move(seq);
    Value tm = Value::list();
    for (const auto& t : timers) {
        Value tv = Value::map();
        tv["due_ms"] = t.due_ms;
        tv["task"] = t.task;
        tv["event"] = event_value(t.event);
        tm.push_back(std::move(tv));
    }
    v["timers"] = std::move(tm);
    return v;
}

Agent Agent::restore(const Behavior& b, const Value& v)
{
    if (!v.is_map())
        fail(Errc::bad_frame, "agent state is not a map");
    Agent a;
    a.name = v.get_string("name");
    a.behavior_id = v.get_string("behavior");
    if (a.behavior_id != b.id)
        fail(Errc::bad_frame, "agent state belongs to behavior '" + a.behavior_id + "'");
    a.home = v.get_string("home");
    if (auto* d = v.find("data"))
        a.data = *d;
    if (auto* ts = v.find("tasks"); ts && ts->is_list()) {
        for (const auto& t : ts->as_list()) {
            auto model = b.task(t.get_string("task"));
            if (!model)
                fail(Errc::bad_frame, "agent state names unknown task '" + t.get_string("task") + "'");
            a.tasks.push_back(behavior::TaskInstance::restore(model, t));
        }
    }
    if (auto* mb = v.find("mailbox"); mb && mb->is_list())
        for (const auto& m : mb->as_list())
            a.mailbox.push_back(Message::from_value(m));
    if (auto* s = v.find("last_seen"); s && s->is_map())
        for (const auto& [k, n] : s->as_map())
            a.last_seen.emplace(k, n.as_int());
    if (auto* s = v.find("next_seq"); s && s->is_map())
        for (const auto& [k, n] : s->as_map())
            a.next_seq.emplace(k, n.as_int());
    if (auto* tm = v.find("timers"); tm && tm->is_list()) {
        for (const auto& t : tm->as_list()) {
            auto* ev = t.find("event");
            a.timers.push_back({t.get_int("due_ms"), t.get_string("task"), ev ? event_from(*ev) : behavior::Event{}});
        }
    }
    return a;
}

behavior::TaskInstance* Agent::task(std::string_view task_name)
{
    for (auto& t : tasks)
        if (t.task_name() == task_name)
            return &t;
    return nullptr;
}

void Agent::post(std::string_view task_name, behavior::Event e)
{
    auto* t = task(task_name);
    if (!t)
        fail(Errc::unknown_task, "agent '" + name + "' has no task '" + std::string(task_name) + "'");
    t->post(std::move(e));
}

bool Agent::accept(const Message& m)
{
    auto [it, fresh] = last_seen.try_emplace(dedupe_key(m.sender, m.conversation), m.seq);
    if (fresh)
        return true;
    if (m.seq <= it->second)
        return false;
    it->second = m.seq;
    return true;
}

behavior::Event message_event(const Message& m)
{
    behavior::Event e;
    e.name = m.label();
    e.payload = m.payload;
    e.payload["_sender"] = m.sender;
    e.payload["_conversation"] = m.conversation;
    e.payload["_performative"] = std::string(to_string(m.performative));
    e.payload["_seq"] = m.seq;
    return e;
}

std::size_t Agent::dispatch(const Message& m)
{
    behavior::Event e = message_event(m);
    std::size_t reached = 0;
    for (auto& t : tasks) {
        for (const auto& tr : t.model->model().transitions) {
            if (tr.trigger == e.name) {
                t.post(e);
                ++reached;
                break;
            }
        }
    }
    if (reached == 0)
        log().debug("agent '{}': no task handles '{}' from '{}'; dropped", name, e.name, m.sender);
    return reached;
}

} // namespace agentest::runtime
