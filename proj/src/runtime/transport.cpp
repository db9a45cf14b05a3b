#include "runtime/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstring>

#include "core/error.hpp"
#include "core/log.hpp"
#include "runtime/frame.hpp"

namespace agentest::runtime {

Bytes InProcessNetwork::exchange(const std::string& address, const Bytes& frame)
{
    std::shared_ptr<FrameHandler> handler;
    Interceptor intercept;
    {
        std::lock_guard lock(mu_);
        ++frames_;
        if (down_.contains(address))
            fail(Errc::transport_failure, address + " is down");
        auto it = handlers_.find(address);
        if (it == handlers_.end())
            fail(Errc::transport_failure, "nothing listens on " + address);
        handler = it->second;
        intercept = interceptor_;
    }
    Bytes request = frame;
    if (intercept && !intercept(address, request))
        fail(Errc::transport_failure, "frame to " + address + " dropped");
    return (*handler)(request);
}

std::string InProcessNetwork::listen(const std::string& address, FrameHandler handler)
{
    std::lock_guard lock(mu_);
    if (handlers_.contains(address))
        fail(Errc::address_in_use, address + " already in use");
    handlers_.emplace(address, std::make_shared<FrameHandler>(std::move(handler)));
    return address;
}

void InProcessNetwork::close(const std::string& address)
{
    std::lock_guard lock(mu_);
    handlers_.erase(address);
}

void InProcessNetwork::set_interceptor(Interceptor fn)
{
    std::lock_guard lock(mu_);
    interceptor_ = std::move(fn);
}

void InProcessNetwork::set_down(const std::string& address, bool down)
{
    std::lock_guard lock(mu_);
    if (down)
        down_.insert(address);
    else
        down_.erase(address);
}

bool InProcessNetwork::is_down(const std::string& address) const
{
    std::lock_guard lock(mu_);
    return down_.contains(address);
}

std::size_t InProcessNetwork::frames_sent() const
{
    std::lock_guard lock(mu_);
    return frames_;
}

// ---------------------------------------------------------------------------
// TCP

std::pair<std::string, int> split_host_port(const std::string& address)
{
    auto colon = address.rfind(':');
    if (colon == std::string::npos || colon == 0)
        fail(Errc::invalid_argument, "address '" + address + "' is not host:port");
    int port = 0;
    try {
        port = std::stoi(address.substr(colon + 1));
    } catch (const std::exception&) {
        fail(Errc::invalid_argument, "address '" + address + "' has a bad port");
    }
    if (port < 0 || port > 65535)
        fail(Errc::invalid_argument, "address '" + address + "' has a bad port");
    return {address.substr(0, colon), port};
}

namespace {

bool wait_fd(int fd, short events, int timeout_ms)
{
    pollfd p{fd, events, 0};
    int r;
    do {
        r = ::poll(&p, 1, timeout_ms);
    } while (r < 0 && errno == EINTR);
    return r > 0;
}

bool write_all(int fd, const std::uint8_t* data, std::size_t n, int timeout_ms)
{
    while (n > 0) {
        if (!wait_fd(fd, POLLOUT, timeout_ms))
            return false;
        ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
        if (w < 0 && errno == EINTR)
            continue;
        if (w <= 0)
            return false;
        data += w;
        n -= static_cast<std::size_t>(w);
    }
    return true;
}

bool read_all(int fd, std::uint8_t* data, std::size_t n, int timeout_ms)
{
    while (n > 0) {
        if (!wait_fd(fd, POLLIN, timeout_ms))
            return false;
        ssize_t r = ::recv(fd, data, n, 0);
        if (r < 0 && errno == EINTR)
            continue;
        if (r <= 0)
            return false;
        data += r;
        n -= static_cast<std::size_t>(r);
    }
    return true;
}

// Reads one length-prefixed frame; nullopt on EOF, timeout or oversize.
std::optional<Bytes> read_frame(int fd, int timeout_ms)
{
    Bytes frame(4);
    if (!read_all(fd, frame.data(), 4, timeout_ms))
        return std::nullopt;
    std::size_t n;
    try {
        n = frame_length(frame.data());
    } catch (const Error&) {
        return std::nullopt;
    }
    frame.resize(4 + n);
    if (!read_all(fd, frame.data() + 4, n, timeout_ms))
        return std::nullopt;
    return frame;
}

addrinfo* resolve_addr(const std::string& host, int port, bool passive)
{
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    if (passive)
        hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    std::string h = host == "*" ? "0.0.0.0" : host;
    if (::getaddrinfo(h.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res)
        return nullptr;
    return res;
}

} // namespace

struct TcpTransport::Listener {
    int fd = -1;
    std::string address;
    FrameHandler handler;
    std::thread acceptor;
    std::atomic<bool> stopping{false};
    std::mutex mu;
    std::map<int, std::thread> connections;
    std::vector<std::thread> finished;
};

TcpTransport::~TcpTransport()
{
    std::vector<std::string> addrs;
    {
        std::lock_guard lock(mu_);
        for (const auto& [a, _] : listeners_)
            addrs.push_back(a);
    }
    for (const auto& a : addrs)
        close(a);
}

Bytes TcpTransport::exchange(const std::string& address, const Bytes& frame)
{
    auto [host, port] = split_host_port(address);
    addrinfo* res = resolve_addr(host, port, false);
    if (!res)
        fail(Errc::transport_failure, "cannot resolve " + address);
    int fd = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
    if (fd < 0) {
        ::freeaddrinfo(res);
        fail(Errc::transport_failure, std::string("socket: ") + std::strerror(errno));
    }
    int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
    ::freeaddrinfo(res);
    if (rc != 0) {
        std::string why = std::strerror(errno);
        ::close(fd);
        fail(Errc::transport_failure, "connect " + address + ": " + why);
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    bool ok = write_all(fd, frame.data(), frame.size(), timeout_ms_);
    std::optional<Bytes> response = ok ? read_frame(fd, timeout_ms_) : std::nullopt;
    ::close(fd);
    if (!response)
        fail(Errc::transport_failure, "no response from " + address);
    return *response;
}

std::string TcpTransport::listen(const std::string& address, FrameHandler handler)
{
    auto [host, port] = split_host_port(address);
    addrinfo* res = resolve_addr(host, port, true);
    if (!res)
        fail(Errc::invalid_argument, "cannot resolve " + address);
    int fd = ::socket(res->ai_family, res->ai_socktype | SOCK_CLOEXEC, res->ai_protocol);
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, res->ai_addr, res->ai_addrlen) != 0 || ::listen(fd, 64) != 0) {
        std::string why = std::strerror(errno);
        bool in_use = errno == EADDRINUSE;
        ::freeaddrinfo(res);
        ::close(fd);
        fail(in_use ? Errc::address_in_use : Errc::transport_failure, "listen " + address + ": " + why);
    }
    ::freeaddrinfo(res);

    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
    std::string actual = host + ":" + std::to_string(ntohs(bound.sin_port));

    auto l = std::make_shared<Listener>();
    l->fd = fd;
    l->address = actual;
    l->handler = std::move(handler);
    {
        std::lock_guard lock(mu_);
        if (listeners_.contains(actual)) {
            ::close(fd);
            fail(Errc::address_in_use, actual + " already in use");
        }
        listeners_.emplace(actual, l);
    }
    l->acceptor = std::thread([this, l] {
        while (!l->stopping) {
            if (!wait_fd(l->fd, POLLIN, 100))
                continue;
            int c = ::accept4(l->fd, nullptr, nullptr, SOCK_CLOEXEC);
            if (c < 0)
                continue;
            std::lock_guard lock(l->mu);
            for (auto& t : l->finished)
                t.join();
            l->finished.clear();
            l->connections.emplace(c, std::thread([this, l, c] { serve_connection(l, c); }));
        }
    });
    return actual;
}

void TcpTransport::serve_connection(std::shared_ptr<Listener> l, int fd)
{
    while (!l->stopping) {
        if (!wait_fd(fd, POLLIN, 200))
            continue;
        auto frame = read_frame(fd, timeout_ms_);
        if (!frame)
            break;
        Bytes response;
        try {
            response = l->handler(*frame);
        } catch (const std::exception& e) {
            log().error("{}: frame handler threw: {}", l->address, e.what());
            break;
        }
        if (!write_all(fd, response.data(), response.size(), timeout_ms_))
            break;
    }
    std::lock_guard lock(l->mu);
    auto it = l->connections.find(fd);
    if (it != l->connections.end()) {
        l->finished.push_back(std::move(it->second));
        l->connections.erase(it);
        ::close(fd);
    }
}

void TcpTransport::close(const std::string& address)
{
    std::shared_ptr<Listener> l;
    {
        std::lock_guard lock(mu_);
        auto it = listeners_.find(address);
        if (it == listeners_.end())
            return;
        l = it->second;
        listeners_.erase(it);
    }
    l->stopping = true;
    if (l->acceptor.joinable())
        l->acceptor.join();
    ::close(l->fd);
    std::vector<std::thread> threads;
    std::vector<int> fds;
    {
        std::lock_guard lock(l->mu);
        for (auto& [c, t] : l->connections) {
            ::shutdown(c, SHUT_RDWR);
            fds.push_back(c);
            threads.push_back(std::move(t));
        }
        l->connections.clear();
        for (auto& t : l->finished)
            threads.push_back(std::move(t));
        l->finished.clear();
    }
    for (auto& t : threads)
        if (t.joinable())
            t.join();
    for (int c : fds)
        ::close(c);
}

} // namespace agentest::runtime
