#pragma once

#include <atomic>
#include <cstdint>

namespace agentest {

// Every timeout, backoff, timer and exam window reads time through this one
// interface so a simulated run can be replayed exactly.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() const = 0;
    virtual void sleep_for_ms(std::int64_t ms) = 0;
    virtual bool simulated() const = 0;
};

class SystemClock final : public Clock {
public:
    std::int64_t now_ms() const override;
    void sleep_for_ms(std::int64_t ms) override;
    bool simulated() const override { return false; }
};

// Logical millisecond counter. Only explicit advances move it; sleeping is an
// advance, so backoff in simulated runs costs no wall time.
class SimulatedClock final : public Clock {
public:
    explicit SimulatedClock(std::int64_t start_ms = 0) : now_(start_ms) {}

    std::int64_t now_ms() const override { return now_.load(); }
    void sleep_for_ms(std::int64_t ms) override { advance(ms); }
    bool simulated() const override { return true; }

    void advance(std::int64_t ms) { now_.fetch_add(ms > 0 ? ms : 0); }
    void set(std::int64_t ms) { now_.store(ms); }

private:
    std::atomic<std::int64_t> now_;
};

} // namespace agentest
