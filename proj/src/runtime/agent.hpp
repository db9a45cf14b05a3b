#pragma once

#include <deque>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "behavior/task_instance.hpp"
#include "runtime/message.hpp"

namespace agentest::runtime {

// A pre-registered kind of agent: its concurrent task models and the activity
// implementations they call. Only the id travels with a migrating agent.
struct Behavior {
    std::string id;
    std::vector<behavior::ModelPtr> tasks;
    std::shared_ptr<const behavior::ActivityRegistry> activities;

    behavior::ModelPtr task(std::string_view name) const;
};

struct Timer {
    std::int64_t due_ms = 0;
    std::string task;
    behavior::Event event;
};

class Agent {
public:
    std::string name;
    std::string behavior_id;
    std::string home;
    Value data = Value::map();
    std::vector<behavior::TaskInstance> tasks;
    std::deque<Message> mailbox;
    std::map<std::string, std::int64_t> last_seen; // "<sender>\x1f<conversation>" -> highest seq accepted
    std::map<std::string, std::int64_t> next_seq;  // conversation -> last seq this agent sent
    std::vector<Timer> timers;

    static Agent create(const Behavior& b, std::string name, std::string home, Value init);
    static Agent restore(const Behavior& b, const Value& snapshot);

    // Everything above, canonical-encodable; restore(snapshot()) is equal.
    Value snapshot() const;

    behavior::TaskInstance* task(std::string_view task_name);
    // Throws Error(unknown_task).
    void post(std::string_view task_name, behavior::Event e);

    // False when (sender, conversation, seq) was seen already.
    bool accept(const Message& m);
    std::int64_t assign_seq(const std::string& conversation) { return ++next_seq[conversation]; }

    // Turns a mailbox message into an event for every task with a transition
    // triggered by its label. Returns the number of tasks reached.
    std::size_t dispatch(const Message& m);
};

behavior::Event message_event(const Message& m);

} // namespace agentest::runtime
