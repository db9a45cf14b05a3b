#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "behavior/guard.hpp"
#include "core/error.hpp"
#include "core/value.hpp"

namespace agentest::behavior {

// result = name(param1, ..., paramN); params and result name context variables.
struct Activity {
    std::string name;
    std::vector<std::string> params;
    std::string result;
};

enum class TransmissionKind { external_message, internal_event };

// Output of a firing transition. String fields and payload leaves of the form
// "$path" are looked up in the task scope when the transition fires; "$$" escapes
// a literal dollar sign. `payload` may itself be a "$path" naming a map.
struct Transmission {
    TransmissionKind kind = TransmissionKind::internal_event;
    std::string target;       // agent reference (external) or sibling task name (internal)
    std::string event;        // event name; external messages carry it as payload.type
    std::string performative; // external only: request|inform|agree|refuse|failure
    std::string conversation; // external only; defaults to the triggering event's conversation
    Value payload = Value::map();
};

struct Transition {
    std::string from;
    std::string to;
    std::string trigger; // empty: eventless
    std::string guard;
    std::vector<Transmission> transmissions;
};

struct State {
    std::string name;
    std::vector<Activity> activities;
};

struct TaskModel {
    std::string task_name;
    std::vector<State> states;
    std::vector<Transition> transitions;
    std::string initial_state;
    std::vector<std::string> context_vars;
};

// The implicit state a task enters when one of its activities throws.
inline constexpr std::string_view k_failed_state = "failed";
// Context variable bound to the payload of the most recently consumed event.
inline constexpr std::string_view k_event_var = "event";

struct ModelIssue {
    std::string kind; // dangling-state | unknown-variable | duplicate-transition | ...
    std::string detail;
};

class ModelValidationError : public Error {
public:
    ModelValidationError(std::string task, std::vector<ModelIssue> issues);
    const std::vector<ModelIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ModelIssue> issues_;
};

// Immutable once built, so instances may be shared across agents and threads.
class ValidatedTaskModel {
public:
    const TaskModel& model() const noexcept { return model_; }
    const std::string& name() const noexcept { return model_.task_name; }
    const State* state(std::string_view name) const;
    const Guard& guard(std::size_t transition_index) const { return guards_.at(transition_index); }
    bool declares(std::string_view var) const;

private:
    friend std::shared_ptr<const ValidatedTaskModel> validate_model(TaskModel model);
    TaskModel model_;
    std::vector<Guard> guards_;
    std::map<std::string, std::size_t, std::less<>> state_index_;
};

using ModelPtr = std::shared_ptr<const ValidatedTaskModel>;

// Structural checks: dangling states, unknown context variables, duplicate
// (from, trigger, guard) transitions, guard syntax. Throws ModelValidationError
// listing every problem found.
ModelPtr validate_model(TaskModel model);

// Declarative document form; "ε", "epsilon" or a missing trigger mean eventless.
TaskModel task_model_from_json(const nlohmann::json& doc);
nlohmann::json task_model_to_json(const TaskModel& model);
TaskModel load_task_model(const std::string& path);

} // namespace agentest::behavior
