#include "runtime/container.hpp"

#include "core/error.hpp"
#include "core/log.hpp"
#include "runtime/envelope.hpp"
#include "runtime/frame.hpp"

namespace agentest::runtime {

namespace {

// The agent whose step is running on this thread, so a container never waits
// for that agent to become idle from inside its own activity.
thread_local const Container* t_container = nullptr;
thread_local const std::string* t_agent = nullptr;

struct SteppingScope {
    SteppingScope(const Container* c, const std::string* a)
        : prev_c(t_container), prev_a(t_agent)
    {
        t_container = c;
        t_agent = a;
    }
    ~SteppingScope()
    {
        t_container = prev_c;
        t_agent = prev_a;
    }
    const Container* prev_c;
    const std::string* prev_a;
};

bool handles(const behavior::TaskInstance& t, std::string_view event)
{
    for (const auto& tr : t.model->model().transitions)
        if (tr.trigger == event)
            return true;
    return false;
}

Value ack_body(const std::string& container)
{
    Value v = Value::map();
    v["container"] = container;
    return v;
}

} // namespace

// ---------------------------------------------------------------------------
// AgentContext

Clock& AgentContext::clock()
{
    return container_.clock();
}

void AgentContext::send(Message m)
{
    outbox_.emplace_back(current_task_, std::move(m));
}

DeliveryReceipt AgentContext::send_now(Message m)
{
    container_.flush(*this);
    m.sender = agent_.name;
    if (m.seq == 0)
        m.seq = agent_.assign_seq(m.conversation);
    return container_.deliver(m);
}

std::string AgentContext::spawn(const std::string& behavior, Value init, std::string name)
{
    return container_.spawn(behavior, std::move(init), std::move(name));
}

MigrationReceipt AgentContext::migrate(const std::string& agent, const std::string& dest)
{
    return container_.migrate(agent, dest);
}

std::optional<std::string> AgentContext::locate(const std::string& agent)
{
    auto r = container_.directory().resolve(agent);
    if (!r)
        return std::nullopt;
    return r->container;
}

void AgentContext::post(const std::string& task, behavior::Event e)
{
    agent_.post(task, std::move(e));
}

void AgentContext::schedule(std::int64_t delay_ms, const std::string& task, behavior::Event e)
{
    if (!agent_.task(task))
        fail(Errc::unknown_task, "agent '" + agent_.name + "' has no task '" + task + "'");
    agent_.timers.push_back({container_.clock().now_ms() + delay_ms, task, std::move(e)});
}

AgentContext& context_of(const behavior::ActivityCall& call)
{
    auto* ctx = dynamic_cast<AgentContext*>(call.host);
    if (!ctx)
        fail(Errc::internal, "activity '" + call.task.task_name() + "' needs an agent context");
    return *ctx;
}

// ---------------------------------------------------------------------------
// lifecycle

Container::Container(ContainerConfig config, Environment env)
    : config_(std::move(config)), env_(env)
{
}

std::unique_ptr<Container> Container::start(ContainerConfig config, Environment env)
{
    if (config.id.empty())
        fail(Errc::invalid_argument, "container id must not be empty");
    if (config.shared_secret.size() < k_min_secret)
        fail(Errc::invalid_argument, "shared secret must be at least 16 bytes");

    std::unique_ptr<Container> c(new Container(std::move(config), env));
    const auto& cfg = c->config_;
    if (cfg.directory_address == "in-process" || cfg.host_directory) {
        c->directory_ = &env.directory;
    } else {
        Transport& t = cfg.directory_address.starts_with("inproc://") ? static_cast<Transport&>(env.inproc)
                                                                       : static_cast<Transport&>(env.tcp);
        c->remote_directory_ = std::make_unique<RemoteDirectory>(t, cfg.directory_address, cfg.shared_secret, cfg.id);
        c->directory_ = c->remote_directory_.get();
    }
    if (c->directory_->container_address(cfg.id))
        fail(Errc::duplicate_container, "container '" + cfg.id + "' is already registered");

    Container* self = c.get();
    FrameHandler handler = [self](const Bytes& f) { return self->handle_frame(f); };
    if (cfg.listen_address == "in-process")
        c->address_ = env.inproc.listen("inproc://" + cfg.id, std::move(handler));
    else
        c->address_ = env.tcp.listen(cfg.listen_address, std::move(handler));

    try {
        c->directory_->register_container(cfg.id, c->address_);
    } catch (...) {
        c->shutdown();
        throw;
    }
    return c;
}

Container::~Container()
{
    stop_worker();
    shutdown();
}

void Container::shutdown()
{
    if (!alive_.exchange(false))
        return;
    if (address_.starts_with("inproc://"))
        env_.inproc.close(address_);
    else if (!address_.empty())
        env_.tcp.close(address_);
}

void Container::start_worker(int idle_sleep_ms)
{
    if (worker_.joinable())
        return;
    worker_stop_ = false;
    worker_ = std::thread([this, idle_sleep_ms] {
        while (!worker_stop_) {
            bool progressed = false;
            try {
                progressed = tick();
            } catch (const std::exception& e) {
                log().error("container '{}': tick failed: {}", id(), e.what());
            }
            if (!progressed)
                std::this_thread::sleep_for(std::chrono::milliseconds(idle_sleep_ms));
        }
    });
}

void Container::stop_worker()
{
    worker_stop_ = true;
    if (worker_.joinable())
        worker_.join();
}

Bytes Container::exchange(const std::string& address, const Bytes& frame)
{
    if (address.starts_with("inproc://"))
        return env_.inproc.exchange(address, frame);
    return env_.tcp.exchange(address, frame);
}

// ---------------------------------------------------------------------------
// behaviors and agents

void Container::register_behavior(const std::string& behavior_id, std::vector<behavior::TaskModel> models,
                                  std::shared_ptr<const behavior::ActivityRegistry> activities)
{
    Behavior b;
    b.id = behavior_id;
    for (auto& m : models)
        b.tasks.push_back(behavior::validate_model(std::move(m)));
    b.activities = std::move(activities);
    register_behavior(std::move(b));
}

void Container::register_behavior(Behavior b)
{
    if (b.id.empty())
        fail(Errc::invalid_argument, "behavior id must not be empty");
    if (!b.activities)
        b.activities = std::make_shared<behavior::ActivityRegistry>();
    std::set<std::string> names;
    for (const auto& t : b.tasks) {
        if (!t)
            fail(Errc::invalid_model, "behavior '" + b.id + "' has a null task model");
        if (!names.insert(t->name()).second)
            fail(Errc::invalid_model, "behavior '" + b.id + "' declares task '" + t->name() + "' twice");
        auto missing = b.activities->missing_for(*t);
        if (!missing.empty())
            fail(Errc::invalid_model, "task '" + t->name() + "' uses unimplemented activity '" + missing.front() + "'");
    }
    std::lock_guard lock(mu_);
    if (behaviors_.contains(b.id))
        fail(Errc::duplicate_behavior, "behavior '" + b.id + "' is already registered on '" + id() + "'");
    std::string key = b.id;
    behaviors_.emplace(std::move(key), std::make_shared<const Behavior>(std::move(b)));
}

bool Container::has_behavior(const std::string& behavior_id) const
{
    std::lock_guard lock(mu_);
    return behaviors_.contains(behavior_id);
}

std::string Container::spawn(const std::string& behavior_id, Value init, std::string name)
{
    {
        std::lock_guard lock(mu_);
        auto b = behaviors_.find(behavior_id);
        if (b == behaviors_.end())
            fail(Errc::unknown_behavior, "behavior '" + behavior_id + "' is not registered on '" + id() + "'");
        if (name.empty()) {
            do
                name = behavior_id + ":" + std::to_string(++spawned_);
            while (agents_.contains(name));
        }
        if (agents_.contains(name) || migrating_.contains(name))
            fail(Errc::duplicate_agent, "agent '" + name + "' already exists");
        agents_.emplace(name, std::make_unique<Agent>(Agent::create(*b->second, name, id(), std::move(init))));
    }
    try {
        directory_->bind(name, id());
    } catch (...) {
        std::lock_guard lock(mu_);
        agents_.erase(name);
        throw;
    }
    return name;
}

std::unique_lock<std::mutex> Container::wait_idle(const std::string& agent)
{
    if (t_container == this && t_agent && *t_agent == agent)
        fail(Errc::invalid_argument, "agent '" + agent + "' cannot do this to itself from inside a step");
    std::unique_lock lock(mu_);
    idle_cv_.wait(lock, [&] { return !busy_.contains(agent); });
    return lock;
}

void Container::terminate(const std::string& agent)
{
    {
        auto lock = wait_idle(agent);
        if (agents_.erase(agent) == 0)
            fail(Errc::not_found, "agent '" + agent + "' is not resident on '" + id() + "'");
    }
    remove_agent(agent, true);
}

void Container::remove_agent(const std::string& name, bool unbind)
{
    if (unbind) {
        try {
            directory_->unbind(name);
        } catch (const Error& e) {
            log().warn("container '{}': unbinding '{}': {}", id(), name, e.detail());
        }
    }
    env_.observer.on_terminated(name, id());
}

void Container::post_internal_event(const std::string& agent, const std::string& task, behavior::Event e)
{
    auto lock = wait_idle(agent);
    auto it = agents_.find(agent);
    if (it == agents_.end())
        fail(Errc::not_found, "agent '" + agent + "' is not resident on '" + id() + "'");
    it->second->post(task, std::move(e));
}

std::vector<std::string> Container::agents() const
{
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [n, _] : agents_)
        out.push_back(n);
    return out;
}

bool Container::resident(const std::string& agent) const
{
    std::lock_guard lock(mu_);
    return agents_.contains(agent);
}

std::size_t Container::mailbox_size(const std::string& agent) const
{
    std::lock_guard lock(mu_);
    auto it = agents_.find(agent);
    if (it == agents_.end())
        fail(Errc::not_found, "agent '" + agent + "' is not resident on '" + id() + "'");
    return it->second->mailbox.size();
}

bool Container::with_agent(const std::string& agent, const std::function<void(Agent&)>& fn)
{
    auto lock = wait_idle(agent);
    auto it = agents_.find(agent);
    if (it == agents_.end())
        return false;
    fn(*it->second);
    return true;
}

// ---------------------------------------------------------------------------
// messaging

DeliveryReceipt Container::send(Message m)
{
    if (m.seq == 0) {
        std::lock_guard lock(mu_);
        m.seq = ++external_seq_[m.sender + '\x1f' + m.conversation];
    }
    return deliver(m);
}

DeliveryReceipt Container::deliver(const Message& m)
{
    const Bytes frame = encode_frame(FrameKind::message, m.to_value(), secret());
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt < k_send_attempts; ++attempt) {
        auto where = directory_->resolve(m.receiver);
        if (!where)
            fail(Errc::unknown_receiver, "no agent named '" + m.receiver + "'");
        bool backoff = true;
        if (auto addr = directory_->container_address(where->container)) {
            try {
                Value ack = expect_ack(decode_frame(exchange(*addr, frame), secret()));
                env_.observer.on_sent(m);
                return {ack.get_string("container", where->container), where->epoch, ack.get_bool("duplicate")};
            } catch (const Error& e) {
                last_error = e.detail();
                if (e.code() == Errc::unknown_receiver) {
                    // Stale location: retry at once if the directory has moved on.
                    auto again = directory_->resolve(m.receiver);
                    if (!again || (again->container == where->container && again->epoch == where->epoch))
                        throw;
                    backoff = false;
                } else if (e.code() != Errc::transport_failure) {
                    throw;
                }
            }
        } else {
            last_error = "container '" + where->container + "' has no address";
        }
        if (backoff && attempt + 1 < k_send_attempts)
            env_.clock.sleep_for_ms(k_first_backoff_ms << attempt);
    }
    fail(Errc::transport_failure, "giving up on '" + m.receiver + "' after " + std::to_string(k_send_attempts) +
                                      " attempts: " + last_error);
}

Bytes Container::handle_frame(const Bytes& frame)
{
    Frame f;
    try {
        f = decode_frame(frame, secret());
    } catch (const Error& e) {
        return nack_frame(e.code_name(), e.detail(), secret());
    }
    try {
        switch (f.kind) {
        case FrameKind::message: {
            Message m = Message::from_value(f.body);
            if (m.receiver == k_directory_receiver) {
                if (!config_.host_directory)
                    fail(Errc::not_found, "container '" + id() + "' does not host the directory");
                return ack_frame(env_.directory.handle(m.payload), secret());
            }
            return accept_message(m, frame);
        }
        case FrameKind::migrate:
            return accept_migration(f.body);
        default:
            fail(Errc::bad_frame, "unexpected " + std::string(to_string(f.kind)) + " frame");
        }
    } catch (const Error& e) {
        return nack_frame(e.code_name(), e.detail(), secret());
    } catch (const std::exception& e) {
        return nack_frame(errc_name(Errc::internal), e.what(), secret());
    }
}

Bytes Container::accept_message(const Message& m, const Bytes& frame)
{
    std::string forward_to;
    {
        std::lock_guard lock(mu_);
        if (auto it = agents_.find(m.receiver); it != agents_.end()) {
            Value body = ack_body(id());
            if (!it->second->accept(m)) {
                body["duplicate"] = true;
                return ack_frame(body, secret());
            }
            it->second->mailbox.push_back(m);
            env_.observer.on_delivered(m, id());
            return ack_frame(body, secret());
        }
        if (auto it = migrating_.find(m.receiver); it != migrating_.end()) {
            it->second.push_back(m);
            Value body = ack_body(id());
            body["buffered"] = true;
            return ack_frame(body, secret());
        }
        auto stub = stubs_.find(m.receiver);
        if (stub == stubs_.end() || stub->second.expires_ms <= env_.clock.now_ms())
            fail(Errc::unknown_receiver, "agent '" + m.receiver + "' is not resident on '" + id() + "'");
        forward_to = stub->second.dest;
    }
    auto addr = directory_->container_address(forward_to);
    if (!addr)
        fail(Errc::unknown_receiver, "agent '" + m.receiver + "' moved to unknown container '" + forward_to + "'");
    return exchange(*addr, frame);
}

// ---------------------------------------------------------------------------
// migration

MigrationReceipt Container::migrate(const std::string& agent, const std::string& dest)
{
    if (dest == id())
        fail(Errc::invalid_argument, "agent '" + agent + "' is already on '" + dest + "'");
    auto addr = directory_->container_address(dest);
    if (!addr)
        fail(Errc::not_found, "container '" + dest + "' is not registered");

    std::unique_ptr<Agent> a;
    {
        auto lock = wait_idle(agent);
        auto it = agents_.find(agent);
        if (it == agents_.end())
            fail(Errc::not_found, "agent '" + agent + "' is not resident on '" + id() + "'");
        a = std::move(it->second);
        agents_.erase(it);
        migrating_[agent];
    }

    AgentEnvelope env;
    env.agent = a->name;
    env.behavior = a->behavior_id;
    env.state_blob = encode_canonical(a->snapshot());
    env.seal(secret());
    try {
        expect_ack(decode_frame(exchange(*addr, encode_frame(FrameKind::migrate, env.to_value(), secret())), secret()));
    } catch (const Error& e) {
        // Resume at the source with whatever arrived meanwhile.
        std::lock_guard lock(mu_);
        for (auto& m : migrating_[agent]) {
            if (a->accept(m)) {
                a->mailbox.push_back(m);
                env_.observer.on_delivered(m, id());
            }
        }
        migrating_.erase(agent);
        agents_.emplace(agent, std::move(a));
        idle_cv_.notify_all();
        log().info("container '{}': migration of '{}' to '{}' failed: {}", id(), agent, dest, e.detail());
        throw;
    }

    MigrationReceipt r{agent, id(), dest, 0, 0};
    for (;;) {
        std::vector<Message> batch;
        {
            std::lock_guard lock(mu_);
            auto& buffered = migrating_[agent];
            if (buffered.empty()) {
                migrating_.erase(agent);
                stubs_[agent] = {dest, env_.clock.now_ms() + k_forward_grace_ms};
                r.epoch = directory_->rebind(agent, dest);
                break;
            }
            batch.swap(buffered);
        }
        for (const auto& m : batch) {
            try {
                expect_ack(decode_frame(exchange(*addr, encode_frame(FrameKind::message, m.to_value(), secret())), secret()));
                ++r.forwarded;
            } catch (const Error& e) {
                log().error("container '{}': forwarding to migrated '{}' failed: {}", id(), agent, e.detail());
            }
        }
    }
    env_.observer.on_migrated(agent, id(), dest, a->data);
    return r;
}

Bytes Container::accept_migration(const Value& body)
{
    AgentEnvelope env = AgentEnvelope::from_value(body);
    if (!env.verify(secret()))
        fail(Errc::mac_invalid, "envelope for '" + env.agent + "' does not verify");
    std::shared_ptr<const Behavior> b;
    {
        std::lock_guard lock(mu_);
        auto it = behaviors_.find(env.behavior);
        if (it == behaviors_.end())
            fail(Errc::behavior_unregistered, "behavior '" + env.behavior + "' is not registered on '" + id() + "'");
        b = it->second;
    }
    Agent a;
    try {
        a = Agent::restore(*b, decode_canonical(env.state_blob));
    } catch (const Error& e) {
        fail(Errc::bad_frame, "envelope state for '" + env.agent + "': " + e.detail());
    }
    if (a.name != env.agent)
        fail(Errc::bad_frame, "envelope names '" + env.agent + "' but carries '" + a.name + "'");
    std::lock_guard lock(mu_);
    if (agents_.contains(a.name) || migrating_.contains(a.name))
        fail(Errc::duplicate_agent, "agent '" + a.name + "' is already resident on '" + id() + "'");
    stubs_.erase(a.name);
    std::string name = a.name;
    agents_.emplace(name, std::make_unique<Agent>(std::move(a)));
    return ack_frame(ack_body(id()), secret());
}

// ---------------------------------------------------------------------------
// execution

bool Container::tick()
{
    if (!alive_)
        return false;
    std::vector<std::string> names;
    {
        std::lock_guard lock(mu_);
        const auto now = env_.clock.now_ms();
        std::erase_if(stubs_, [&](const auto& kv) { return kv.second.expires_ms <= now; });
        for (const auto& [n, _] : agents_)
            names.push_back(n);
    }
    bool progressed = false;
    for (const auto& n : names)
        progressed |= tick_agent(n);
    return progressed;
}

bool Container::tick_agent(const std::string& name)
{
    Agent* a = nullptr;
    std::shared_ptr<const Behavior> b;
    std::vector<Timer> fired;
    std::vector<Message> inbox;
    {
        std::lock_guard lock(mu_);
        auto it = agents_.find(name);
        if (it == agents_.end() || busy_.contains(name))
            return false;
        a = it->second.get();
        b = behaviors_.at(a->behavior_id);
        busy_.insert(name);
        const auto now = env_.clock.now_ms();
        std::stable_sort(a->timers.begin(), a->timers.end(),
                         [](const Timer& x, const Timer& y) { return x.due_ms < y.due_ms; });
        auto split = std::find_if(a->timers.begin(), a->timers.end(), [&](const Timer& t) { return t.due_ms > now; });
        fired.assign(std::make_move_iterator(a->timers.begin()), std::make_move_iterator(split));
        a->timers.erase(a->timers.begin(), split);
        inbox.assign(a->mailbox.begin(), a->mailbox.end());
        a->mailbox.clear();
    }

    bool progressed = !fired.empty() || !inbox.empty();
    AgentContext ctx(*this, *a);
    {
        SteppingScope scope(this, &a->name);
        for (auto& t : fired) {
            try {
                a->post(t.task, std::move(t.event));
            } catch (const Error& e) {
                log().warn("agent '{}': timer: {}", name, e.detail());
            }
        }
        for (const auto& m : inbox)
            a->dispatch(m);

        for (std::size_t i = 0; i < a->tasks.size(); ++i) {
            ctx.current_task_ = i;
            behavior::StepOutcome out;
            try {
                out = behavior::step_task(a->tasks[i], *b->activities, &ctx);
            } catch (const Error& e) {
                log().error("agent '{}' task '{}': {}", name, a->tasks[i].task_name(), e.detail());
                continue;
            }
            progressed |= out.progressed();
            for (auto& em : out.emissions) {
                if (em.kind == behavior::TransmissionKind::internal_event) {
                    std::string target = em.target.is_string() ? em.target.as_string() : std::string{};
                    behavior::Event ev{em.event, em.payload.is_map() ? em.payload : Value::map()};
                    if (target == "*") {
                        for (std::size_t j = 0; j < a->tasks.size(); ++j)
                            if (j != i)
                                a->tasks[j].post(ev);
                    } else if (auto* t = a->task(target)) {
                        t->post(std::move(ev));
                    } else {
                        log().warn("agent '{}': internal event '{}' for unknown task '{}'", name, em.event, target);
                    }
                    continue;
                }
                auto perf = performative_from(em.performative);
                if (!em.target.is_string() || em.target.as_string().empty() || !perf) {
                    log().warn("agent '{}': dropping malformed transmission '{}' (target {}, performative '{}')",
                               name, em.event, em.target.debug_string(), em.performative);
                    continue;
                }
                Message m;
                m.receiver = em.target.as_string();
                m.performative = *perf;
                m.conversation = em.conversation;
                m.payload = std::move(em.payload);
                ctx.outbox_.emplace_back(i, std::move(m));
            }
        }
        ctx.current_task_ = static_cast<std::size_t>(-1);
        flush(ctx);
    }

    bool terminate = ctx.terminate_;
    {
        std::lock_guard lock(mu_);
        busy_.erase(name);
        if (terminate)
            agents_.erase(name);
        idle_cv_.notify_all();
    }
    if (terminate)
        remove_agent(name, true);
    return progressed;
}

void Container::flush(AgentContext& ctx)
{
    auto out = std::move(ctx.outbox_);
    ctx.outbox_.clear();
    Agent& a = ctx.agent_;
    for (auto& [task, m] : out) {
        m.sender = a.name;
        if (m.seq == 0)
            m.seq = a.assign_seq(m.conversation);
        try {
            deliver(m);
        } catch (const Error& e) {
            log().warn("agent '{}': send '{}' to '{}' failed: {}", a.name, m.label(), m.receiver, e.detail());
            if (task < a.tasks.size() && handles(a.tasks[task], "send_failed")) {
                behavior::Event ev{"send_failed", Value::map()};
                ev.payload["receiver"] = m.receiver;
                ev.payload["label"] = m.label();
                ev.payload["code"] = std::string(e.code_name());
                ev.payload["detail"] = e.detail();
                a.tasks[task].post(std::move(ev));
            }
        }
    }
}

} // namespace agentest::runtime
