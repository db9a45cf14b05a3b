#pragma once

#include <any>
#include <atomic>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "core/clock.hpp"
#include "runtime/agent.hpp"
#include "runtime/directory.hpp"
#include "runtime/transport.hpp"

namespace agentest::runtime {

struct ContainerConfig {
    std::string id;
    std::string listen_address = "in-process"; // or host:port
    Bytes shared_secret;
    std::string directory_address = "in-process"; // or host:port / inproc://id
    bool host_directory = false;                  // serve "$directory" from this container
};

inline constexpr std::size_t k_min_secret = 16;
inline constexpr int k_send_attempts = 3;
inline constexpr std::int64_t k_first_backoff_ms = 100;
inline constexpr std::int64_t k_forward_grace_ms = 2000;

class Observer {
public:
    virtual ~Observer() = default;
    // A message was appended to a mailbox (duplicates are not reported).
    virtual void on_delivered(const Message&, const std::string& /*container*/) {}
    // A send call got its acknowledgement.
    virtual void on_sent(const Message&) {}
    virtual void on_migrated(const std::string& /*agent*/, const std::string& /*from*/, const std::string& /*to*/,
                             const Value& /*data*/) {}
    virtual void on_terminated(const std::string& /*agent*/, const std::string& /*container*/) {}
};

// Process-wide plumbing shared by the containers of one platform.
struct Environment {
    Clock& clock;
    InProcessNetwork& inproc;
    TcpTransport& tcp;
    LocalDirectory& directory;
    Observer& observer;
};

struct MigrationReceipt {
    std::string agent;
    std::string from;
    std::string to;
    std::int64_t epoch = 0;
    std::size_t forwarded = 0;
};

class Container;

// What an activity can do on behalf of the agent it runs in.
class AgentContext final : public behavior::ActivityHost {
public:
    AgentContext(Container& c, Agent& a) : container_(c), agent_(a) {}

    const std::string& self() const { return agent_.name; }
    Agent& agent() { return agent_; }
    Value& data() { return agent_.data; }
    Container& container() { return container_; }
    Clock& clock();

    // Queued; leaves after the current tick, sender and seq filled in then.
    void send(Message m);
    // Leaves now (after anything queued), with retries. Throws on failure.
    DeliveryReceipt send_now(Message m);
    std::string spawn(const std::string& behavior, Value init, std::string name = {});
    MigrationReceipt migrate(const std::string& agent, const std::string& dest);
    std::optional<std::string> locate(const std::string& agent);
    void post(const std::string& task, behavior::Event e);
    void schedule(std::int64_t delay_ms, const std::string& task, behavior::Event e);
    void terminate_self() { terminate_ = true; }

    template <class T>
    T* resource(const std::string& name);

private:
    friend class Container;
    Container& container_;
    Agent& agent_;
    std::vector<std::pair<std::size_t, Message>> outbox_; // (emitting task or npos, message)
    std::size_t current_task_ = static_cast<std::size_t>(-1);
    bool terminate_ = false;
};

// The AgentContext behind an activity call; throws if the activity runs outside an agent.
AgentContext& context_of(const behavior::ActivityCall& call);

class Container {
public:
    // Listens, connects to the directory and registers. Throws address_in_use,
    // directory_unreachable, duplicate_container or invalid_argument.
    static std::unique_ptr<Container> start(ContainerConfig config, Environment env);
    ~Container();

    Container(const Container&) = delete;
    Container& operator=(const Container&) = delete;

    const std::string& id() const { return config_.id; }
    const std::string& address() const { return address_; }
    Directory& directory() { return *directory_; }
    Clock& clock() { return env_.clock; }
    const Bytes& secret() const { return config_.shared_secret; }

    void register_behavior(const std::string& behavior_id, std::vector<behavior::TaskModel> models,
                           std::shared_ptr<const behavior::ActivityRegistry> activities);
    void register_behavior(Behavior b);
    bool has_behavior(const std::string& behavior_id) const;

    std::string spawn(const std::string& behavior_id, Value init, std::string name = {});
    // From a sender outside this container's agents (harness, gateway). A zero
    // seq is replaced by the next one for (sender, conversation).
    DeliveryReceipt send(Message m);
    MigrationReceipt migrate(const std::string& agent, const std::string& dest);
    void terminate(const std::string& agent);
    void post_internal_event(const std::string& agent, const std::string& task, behavior::Event e);

    // One round: due timers, mailbox drain and one step per task for every
    // resident agent, in name order. True when anything happened.
    bool tick();

    std::vector<std::string> agents() const;
    bool resident(const std::string& agent) const;
    std::size_t mailbox_size(const std::string& agent) const;
    // Runs `fn` on a resident agent between steps; false when not resident.
    bool with_agent(const std::string& agent, const std::function<void(Agent&)>& fn);

    Bytes handle_frame(const Bytes& frame);

    template <class T>
    void set_resource(const std::string& name, std::shared_ptr<T> r)
    {
        std::lock_guard lock(mu_);
        resources_[name] = std::move(r);
    }
    template <class T>
    T* resource(const std::string& name) const
    {
        std::lock_guard lock(mu_);
        auto it = resources_.find(name);
        if (it == resources_.end())
            return nullptr;
        auto* p = std::any_cast<std::shared_ptr<T>>(&it->second);
        return p ? p->get() : nullptr;
    }

    // Real-clock mode: a worker thread ticks continuously.
    void start_worker(int idle_sleep_ms = 2);
    void stop_worker();
    // Stops serving frames and ticking, as if the machine vanished.
    void shutdown();
    bool alive() const { return alive_; }

private:
    friend class AgentContext;
    Container(ContainerConfig config, Environment env);

    Bytes exchange(const std::string& address, const Bytes& frame);
    DeliveryReceipt deliver(const Message& m);
    Bytes accept_message(const Message& m, const Bytes& frame);
    Bytes accept_migration(const Value& body);
    bool tick_agent(const std::string& name);
    void flush(AgentContext& ctx);
    void remove_agent(const std::string& name, bool unbind);
    std::unique_lock<std::mutex> wait_idle(const std::string& agent);

    ContainerConfig config_;
    Environment env_;
    std::string address_;
    Directory* directory_ = nullptr;
    std::unique_ptr<RemoteDirectory> remote_directory_;

    mutable std::mutex mu_;
    std::condition_variable idle_cv_;
    std::map<std::string, std::shared_ptr<const Behavior>> behaviors_;
    std::map<std::string, std::unique_ptr<Agent>> agents_;
    std::set<std::string> busy_;
    std::map<std::string, std::vector<Message>> migrating_;
    struct Stub {
        std::string dest;
        std::int64_t expires_ms;
    };
    std::map<std::string, Stub> stubs_;
    std::map<std::string, std::int64_t> external_seq_;
    std::map<std::string, std::any> resources_;
    std::size_t spawned_ = 0;

    std::atomic<bool> alive_{true};
    std::atomic<bool> worker_stop_{false};
    std::thread worker_;
};

template <class T>
T* AgentContext::resource(const std::string& name)
{
    return container_.resource<T>(name);
}

} // namespace agentest::runtime
