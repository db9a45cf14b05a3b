#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "behavior/task_model.hpp"

namespace agentest::behavior {

struct Event {
    std::string name;
    Value payload = Value::map();

    friend bool operator==(const Event&, const Event&) = default;
};

// Live execution state of one concurrent task.
struct TaskInstance {
    ModelPtr model;
    std::string current_state;
    std::size_t activity_index = 0;
    bool activities_done = false;
    Value context = Value::map();
    std::deque<Event> pending_events;

    // Initial state entered, every declared context variable bound to null.
    static TaskInstance start(ModelPtr model);
    static TaskInstance restore(ModelPtr model, const Value& snapshot);
    Value snapshot() const;

    const std::string& task_name() const { return model->name(); }
    bool failed() const { return current_state == k_failed_state; }
    void post(Event e) { pending_events.push_back(std::move(e)); }
    void enter(const std::string& state);
};

// Opaque handle the agent layer passes through to activity implementations.
class ActivityHost {
public:
    virtual ~ActivityHost() = default;
};

struct ActivityCall {
    std::span<const Value> args;
    const TaskInstance& task;
    ActivityHost* host;
};

using ActivityFn = std::function<Value(const ActivityCall&)>;

class ActivityRegistry {
public:
    void add(std::string name, ActivityFn fn);
    const ActivityFn* find(std::string_view name) const;
    bool contains(std::string_view name) const { return find(name) != nullptr; }
    // Activity names used by the model that have no implementation here.
    std::vector<std::string> missing_for(const ValidatedTaskModel& model) const;

private:
    std::map<std::string, ActivityFn, std::less<>> fns_;
};

// A transmission with every "$path" reference substituted.
struct Emission {
    TransmissionKind kind = TransmissionKind::internal_event;
    Value target;              // agent reference for external, task name for internal ("*" = all siblings)
    std::string event;
    std::string performative;
    std::string conversation;
    Value payload = Value::map();
};

struct StepOutcome {
    enum class Kind { idle, activity, transition, discarded_event, failed };
    Kind kind = Kind::idle;
    std::string activity;                  // Kind::activity / failed
    std::optional<std::size_t> transition; // index into model().transitions
    std::string from_state;
    std::string to_state;
    bool state_changed = false;
    std::optional<Event> consumed;
    std::vector<Emission> emissions;

    bool progressed() const { return kind != Kind::idle; }
};

// Transitions of `instance` that may fire given `event` (nullptr: no event, so
// only eventless transitions are considered). A transition qualifies only when
// its source is the current state, its trigger matches, its guard is true and
// every activity of the current state has run. Guard evaluation errors count
// as false. Declaration order is preserved.
std::vector<std::size_t> eligible_transitions(const TaskInstance& instance, const Event* event);

// One step: runs the next pending activity of the current state; or, once all
// activities are done, consumes at most one pending event and fires at most one
// eligible transition (first declared wins). Eventless transitions are tried
// only when no event is pending, except that a state with eventless exits
// leaves an event it has no trigger for queued and takes such an exit instead.
// Otherwise an event no transition accepts is dropped.
// Activity exceptions move the task to the "failed" state and emit an internal
// "task_failed" event to all sibling tasks.
StepOutcome step_task(TaskInstance& instance, const ActivityRegistry& registry, ActivityHost* host = nullptr);

// Scope guards and transmission templates are evaluated in: the context plus
// `event` bound to the candidate event payload when one is given.
Value task_scope(const TaskInstance& instance, const Event* event);
Value resolve_template(const Value& tmpl, const Value& scope);

} // namespace agentest::behavior
