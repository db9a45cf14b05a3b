#include "behavior/task_instance.hpp"

#include "core/log.hpp"

namespace agentest::behavior {

namespace {

Value event_binding(const Event& e)
{
    Value bound = e.payload.is_map() ? e.payload : Value::map();
    bound["_event"] = e.name;
    return bound;
}

Value resolve_ref(const std::string& s, const Value& scope)
{
    if (s.size() >= 2 && s[0] == '$' && s[1] == '$')
        return s.substr(1);
    if (!s.empty() && s[0] == '$') {
        auto* v = scope.find_path(std::string_view(s).substr(1));
        return v ? *v : Value{};
    }
    return s;
}

Emission emit(const Transmission& tx, const Value& scope)
{
    Emission e;
    e.kind = tx.kind;
    e.event = tx.event;
    e.target = resolve_ref(tx.target, scope);
    if (tx.payload.is_string()) {
        e.payload = resolve_ref(tx.payload.as_string(), scope);
        if (!e.payload.is_map())
            e.payload = Value::map();
    } else {
        e.payload = resolve_template(tx.payload, scope);
    }
    if (tx.kind == TransmissionKind::external_message) {
        e.performative = tx.performative;
        Value conv = tx.conversation.empty() ? Value{} : resolve_ref(tx.conversation, scope);
        if (!conv.is_string()) {
            auto* from_event = scope.find_path("event._conversation");
            conv = from_event && from_event->is_string() ? *from_event : Value(std::string{});
        }
        e.conversation = conv.as_string();
        e.payload["type"] = tx.event;
    }
    return e;
}

bool handles(const TaskInstance& instance, const std::string& event)
{
    for (const auto& t : instance.model->model().transitions)
        if (t.from == instance.current_state && t.trigger == event)
            return true;
    return false;
}

bool has_eventless(const TaskInstance& instance)
{
    for (const auto& t : instance.model->model().transitions)
        if (t.from == instance.current_state && t.trigger.empty())
            return true;
    return false;
}

} // namespace

// ---------------------------------------------------------------------------

TaskInstance TaskInstance::start(ModelPtr model)
{
    TaskInstance t;
    t.model = std::move(model);
    for (const auto& v : t.model->model().context_vars)
        t.context[v] = Value{};
    t.enter(t.model->model().initial_state);
    return t;
}

void TaskInstance::enter(const std::string& state)
{
    current_state = state;
    activity_index = 0;
    const State* s = model->state(state);
    activities_done = !s || s->activities.empty();
}

Value TaskInstance::snapshot() const
{
    Value out = Value::map();
    out["task"] = model->name();
    out["state"] = current_state;
    out["activity_index"] = static_cast<std::int64_t>(activity_index);
    out["activities_done"] = activities_done;
    out["context"] = context;
    Value pending = Value::list();
    for (const auto& e : pending_events) {
        Value ev = Value::map();
        ev["name"] = e.name;
        ev["payload"] = e.payload;
        pending.push_back(std::move(ev));
    }
    out["pending"] = std::move(pending);
    return out;
}

TaskInstance TaskInstance::restore(ModelPtr model, const Value& snap)
{
    TaskInstance t;
    t.model = std::move(model);
    if (snap.get_string("task") != t.model->name())
        fail(Errc::parse_error, "snapshot belongs to task '" + snap.get_string("task") + "'");
    t.current_state = snap.get_string("state");
    if (!t.model->state(t.current_state) && t.current_state != k_failed_state)
        fail(Errc::parse_error, "snapshot state '" + t.current_state + "' unknown to task '" + t.model->name() + "'");
    t.activity_index = static_cast<std::size_t>(snap.get_int("activity_index"));
    t.activities_done = snap.get_bool("activities_done");
    if (auto* c = snap.find("context"))
        t.context = *c;
    if (auto* p = snap.find("pending"); p && p->is_list()) {
        for (const auto& ev : p->as_list()) {
            auto* payload = ev.find("payload");
            t.pending_events.push_back({ev.get_string("name"), payload ? *payload : Value::map()});
        }
    }
    return t;
}

// ---------------------------------------------------------------------------

void ActivityRegistry::add(std::string name, ActivityFn fn)
{
    fns_.insert_or_assign(std::move(name), std::move(fn));
}

const ActivityFn* ActivityRegistry::find(std::string_view name) const
{
    auto it = fns_.find(name);
    return it == fns_.end() ? nullptr : &it->second;
}

std::vector<std::string> ActivityRegistry::missing_for(const ValidatedTaskModel& model) const
{
    std::vector<std::string> out;
    for (const auto& s : model.model().states)
        for (const auto& a : s.activities)
            if (!contains(a.name))
                out.push_back(a.name);
    return out;
}

// ---------------------------------------------------------------------------

Value task_scope(const TaskInstance& instance, const Event* event)
{
    Value scope = instance.context.is_map() ? instance.context : Value::map();
    if (event)
        scope[k_event_var] = event_binding(*event);
    return scope;
}

Value resolve_template(const Value& tmpl, const Value& scope)
{
    switch (tmpl.kind()) {
    case Value::Kind::string:
        return resolve_ref(tmpl.as_string(), scope);
    case Value::Kind::list: {
        Value::List out;
        for (const auto& i : tmpl.as_list())
            out.push_back(resolve_template(i, scope));
        return out;
    }
    case Value::Kind::map: {
        Value::Map out;
        for (const auto& [k, i] : tmpl.as_map())
            out.emplace(k, resolve_template(i, scope));
        return out;
    }
    default:
        return tmpl;
    }
}

std::vector<std::size_t> eligible_transitions(const TaskInstance& instance, const Event* event)
{
    std::vector<std::size_t> out;
    if (!instance.activities_done)
        return out;
    const auto& transitions = instance.model->model().transitions;
    Value scope;
    bool scoped = false;
    for (std::size_t i = 0; i < transitions.size(); ++i) {
        const auto& t = transitions[i];
        if (t.from != instance.current_state)
            continue;
        if (event ? t.trigger != event->name : !t.trigger.empty())
            continue;
        const Guard& g = instance.model->guard(i);
        if (!g.always_true()) {
            if (!scoped) {
                scope = task_scope(instance, event);
                scoped = true;
            }
            try {
                if (!g.evaluate(scope))
                    continue;
            } catch (const Error& e) {
                log().warn("task '{}': guard '{}' failed to evaluate ({}); treated as false",
                           instance.task_name(), g.text(), e.detail());
                continue;
            }
        }
        out.push_back(i);
    }
    return out;
}

StepOutcome step_task(TaskInstance& instance, const ActivityRegistry& registry, ActivityHost* host)
{
    StepOutcome out;
    out.from_state = instance.current_state;
    out.to_state = instance.current_state;
    if (instance.failed())
        return out;

    const State* state = instance.model->state(instance.current_state);
    if (!instance.activities_done && state && instance.activity_index < state->activities.size()) {
        const Activity& act = state->activities[instance.activity_index];
        const ActivityFn* fn = registry.find(act.name);
        if (!fn)
            fail(Errc::missing_activity, "no implementation for activity '" + act.name + "'");
        out.activity = act.name;

        std::vector<Value> args;
        args.reserve(act.params.size());
        for (const auto& p : act.params) {
            auto* v = instance.context.find_path(p);
            args.push_back(v ? *v : Value{});
        }
        try {
            Value result = (*fn)(ActivityCall{args, instance, host});
            if (!act.result.empty())
                instance.context[act.result] = std::move(result);
        } catch (const std::exception& e) {
            log().warn("task '{}': activity '{}' failed: {}", instance.task_name(), act.name, e.what());
            out.kind = StepOutcome::Kind::failed;
            instance.current_state = std::string(k_failed_state);
            instance.activities_done = true;
            out.to_state = instance.current_state;
            out.state_changed = true;
            Emission failed;
            failed.kind = TransmissionKind::internal_event;
            failed.target = "*";
            failed.event = "task_failed";
            failed.payload["task"] = instance.task_name();
            failed.payload["activity"] = act.name;
            failed.payload["error"] = std::string(e.what());
            out.emissions.push_back(std::move(failed));
            return out;
        }
        out.kind = StepOutcome::Kind::activity;
        if (++instance.activity_index >= state->activities.size())
            instance.activities_done = true;
        return out;
    }
    instance.activities_done = true;

    std::optional<Event> event;
    if (!instance.pending_events.empty()) {
        event = std::move(instance.pending_events.front());
        instance.pending_events.pop_front();
        out.consumed = event;
    }

    auto eligible = eligible_transitions(instance, event ? &*event : nullptr);
    if (event && eligible.empty() && !handles(instance, event->name) && has_eventless(instance)) {
        // a transient state keeps events for the state it settles in
        instance.pending_events.push_front(std::move(*event));
        event.reset();
        out.consumed.reset();
        eligible = eligible_transitions(instance, nullptr);
    }
    if (eligible.empty()) {
        if (event) {
            log().debug("task '{}': no transition for event '{}' in state '{}'; dropped",
                        instance.task_name(), event->name, instance.current_state);
            out.kind = StepOutcome::Kind::discarded_event;
        }
        return out;
    }

    const std::size_t index = eligible.front();
    const Transition& t = instance.model->model().transitions[index];
    Value scope = task_scope(instance, event ? &*event : nullptr);
    if (event)
        instance.context[k_event_var] = scope[k_event_var];
    for (const auto& tx : t.transmissions)
        out.emissions.push_back(emit(tx, scope));

    out.kind = StepOutcome::Kind::transition;
    out.transition = index;
    instance.enter(t.to);
    out.to_state = t.to;
    out.state_changed = t.to != t.from;
    return out;
}

} // namespace agentest::behavior
