#include "runtime/platform.hpp"

#include <algorithm>

#include "core/error.hpp"

namespace agentest::runtime {

void Platform::FanOut::on_delivered(const Message& m, const std::string& c)
{
    std::lock_guard lock(mu);
    for (auto* o : observers)
        o->on_delivered(m, c);
}

void Platform::FanOut::on_sent(const Message& m)
{
    std::lock_guard lock(mu);
    for (auto* o : observers)
        o->on_sent(m);
}

void Platform::FanOut::on_migrated(const std::string& a, const std::string& f, const std::string& t, const Value& d)
{
    std::lock_guard lock(mu);
    for (auto* o : observers)
        o->on_migrated(a, f, t, d);
}

void Platform::FanOut::on_terminated(const std::string& a, const std::string& c)
{
    std::lock_guard lock(mu);
    for (auto* o : observers)
        o->on_terminated(a, c);
}

Platform::Platform(std::shared_ptr<Clock> clock) : clock_(std::move(clock)) {}

Platform::~Platform()
{
    stop_workers();
    std::lock_guard lock(mu_);
    containers_.clear();
}

Container& Platform::start_container(ContainerConfig config)
{
    auto c = Container::start(std::move(config), Environment{*clock_, inproc_, tcp_, directory_, fanout_});
    std::lock_guard lock(mu_);
    containers_.push_back(std::move(c));
    return *containers_.back();
}

Container* Platform::find_container(const std::string& id)
{
    std::lock_guard lock(mu_);
    for (auto& c : containers_)
        if (c->id() == id)
            return c.get();
    return nullptr;
}

Container& Platform::container(const std::string& id)
{
    if (auto* c = find_container(id))
        return *c;
    fail(Errc::not_found, "no container '" + id + "' in this process");
}

std::vector<Container*> Platform::containers()
{
    std::lock_guard lock(mu_);
    std::vector<Container*> out;
    for (auto& c : containers_)
        out.push_back(c.get());
    return out;
}

bool Platform::tick_all()
{
    bool progressed = false;
    for (auto* c : containers())
        progressed |= c->tick();
    return progressed;
}

int Platform::run_until_idle(int max_rounds)
{
    int rounds = 0;
    while (rounds < max_rounds) {
        ++rounds;
        if (!tick_all())
            break;
    }
    return rounds;
}

void Platform::kill_container(const std::string& id)
{
    Container& c = container(id);
    c.stop_worker();
    c.shutdown();
}

void Platform::start_workers(int idle_sleep_ms)
{
    for (auto* c : containers())
        if (c->alive())
            c->start_worker(idle_sleep_ms);
}

void Platform::stop_workers()
{
    for (auto* c : containers())
        c->stop_worker();
}

void Platform::add_observer(Observer* o)
{
    std::lock_guard lock(fanout_.mu);
    fanout_.observers.push_back(o);
}

void Platform::remove_observer(Observer* o)
{
    std::lock_guard lock(fanout_.mu);
    std::erase(fanout_.observers, o);
}

} // namespace agentest::runtime
