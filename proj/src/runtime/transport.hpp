#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "core/value.hpp"

namespace agentest::runtime {

// Takes one complete request frame, returns one complete response frame.
using FrameHandler = std::function<Bytes(const Bytes& frame)>;

class Transport {
public:
    virtual ~Transport() = default;
    // Sends a frame and waits for the response frame. Throws
    // Error(transport_failure) when the peer cannot be reached.
    virtual Bytes exchange(const std::string& address, const Bytes& frame) = 0;
    // Starts serving `address`; returns the address peers should use.
    // Throws Error(address_in_use).
    virtual std::string listen(const std::string& address, FrameHandler handler) = 0;
    virtual void close(const std::string& address) = 0;
};

// Same frame bytes as TCP, handed over in memory. Addresses look like
// "inproc://<name>".
class InProcessNetwork final : public Transport {
public:
    // Sees every request before delivery; may rewrite it. Returning false drops
    // the frame, which the sender observes as a transport failure.
    using Interceptor = std::function<bool(const std::string& address, Bytes& frame)>;

    Bytes exchange(const std::string& address, const Bytes& frame) override;
    std::string listen(const std::string& address, FrameHandler handler) override;
    void close(const std::string& address) override;

    void set_interceptor(Interceptor fn);
    void set_down(const std::string& address, bool down);
    bool is_down(const std::string& address) const;
    std::size_t frames_sent() const;

private:
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<FrameHandler>> handlers_;
    std::set<std::string> down_;
    Interceptor interceptor_;
    std::size_t frames_ = 0;
};

// One connection per exchange; the listener serves each connection on its own thread.
class TcpTransport final : public Transport {
public:
    explicit TcpTransport(int io_timeout_ms = 5000) : timeout_ms_(io_timeout_ms) {}
    ~TcpTransport() override;

    Bytes exchange(const std::string& address, const Bytes& frame) override;
    std::string listen(const std::string& address, FrameHandler handler) override;
    void close(const std::string& address) override;

private:
    struct Listener;
    void serve_connection(std::shared_ptr<Listener> l, int fd);

    int timeout_ms_;
    std::mutex mu_;
    std::map<std::string, std::shared_ptr<Listener>> listeners_;
};

// "host:port" split; throws Error(invalid_argument).
std::pair<std::string, int> split_host_port(const std::string& address);

} // namespace agentest::runtime
