#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "core/clock.hpp"
#include "runtime/container.hpp"

namespace agentest::runtime {

// Containers of one process plus the clock, transports and (in-process)
// directory they share. In simulated mode the owner drives tick_all(); in
// real mode every container runs its own worker thread.
class Platform {
public:
    explicit Platform(std::shared_ptr<Clock> clock = std::make_shared<SimulatedClock>());
    ~Platform();

    Platform(const Platform&) = delete;
    Platform& operator=(const Platform&) = delete;

    Container& start_container(ContainerConfig config);
    Container& container(const std::string& id);
    Container* find_container(const std::string& id);
    std::vector<Container*> containers();

    // Every live container ticks once, in start order.
    bool tick_all();
    // Ticks until a round makes no progress or `max_rounds` pass; returns rounds run.
    int run_until_idle(int max_rounds = 10000);

    // The container stops serving and ticking; its directory entries remain,
    // as when a machine disappears.
    void kill_container(const std::string& id);

    void start_workers(int idle_sleep_ms = 2);
    void stop_workers();

    void add_observer(Observer* o);
    void remove_observer(Observer* o);

    Clock& clock() { return *clock_; }
    std::shared_ptr<Clock> clock_ptr() { return clock_; }
    SimulatedClock* simulated_clock() { return dynamic_cast<SimulatedClock*>(clock_.get()); }
    LocalDirectory& directory() { return directory_; }
    InProcessNetwork& network() { return inproc_; }
    TcpTransport& tcp() { return tcp_; }

private:
    class FanOut final : public Observer {
    public:
        void on_delivered(const Message& m, const std::string& c) override;
        void on_sent(const Message& m) override;
        void on_migrated(const std::string& a, const std::string& f, const std::string& t, const Value& d) override;
        void on_terminated(const std::string& a, const std::string& c) override;

        std::mutex mu;
        std::vector<Observer*> observers;
    };

    std::shared_ptr<Clock> clock_;
    InProcessNetwork inproc_;
    TcpTransport tcp_;
    LocalDirectory directory_;
    FanOut fanout_;
    std::mutex mu_;
    std::vector<std::unique_ptr<Container>> containers_;
};

} // namespace agentest::runtime
