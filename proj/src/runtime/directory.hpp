#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "core/value.hpp"

namespace agentest::runtime {

class Transport;

struct Resolution {
    std::string container;
    std::int64_t epoch = 0;
};

// Agent name -> container id, plus container id -> address. Every mutation
// bumps the epoch by exactly one.
class Directory {
public:
    virtual ~Directory() = default;

    virtual std::int64_t register_container(const std::string& id, const std::string& address) = 0;
    virtual std::int64_t unregister_container(const std::string& id) = 0;
    virtual std::optional<std::string> container_address(const std::string& id) = 0;
    virtual std::vector<std::string> containers() = 0;

    virtual std::int64_t bind(const std::string& agent, const std::string& container) = 0;
    virtual std::int64_t rebind(const std::string& agent, const std::string& container) = 0;
    virtual std::int64_t unbind(const std::string& agent) = 0;
    virtual std::optional<Resolution> resolve(const std::string& agent) = 0;

    virtual std::int64_t epoch() = 0;
    virtual std::map<std::string, std::string> entries() = 0;
};

struct DirectoryChange {
    std::int64_t epoch;
    std::string op;
    std::string key;
    std::string container;
};

class LocalDirectory final : public Directory {
public:
    std::int64_t register_container(const std::string& id, const std::string& address) override;
    std::int64_t unregister_container(const std::string& id) override;
    std::optional<std::string> container_address(const std::string& id) override;
    std::vector<std::string> containers() override;

    std::int64_t bind(const std::string& agent, const std::string& container) override;
    std::int64_t rebind(const std::string& agent, const std::string& container) override;
    std::int64_t unbind(const std::string& agent) override;
    std::optional<Resolution> resolve(const std::string& agent) override;

    std::int64_t epoch() override;
    std::map<std::string, std::string> entries() override;

    std::vector<DirectoryChange> history();

    // Serves one request of the remote protocol ({"op": ...}); errors are thrown.
    Value handle(const Value& request);

private:
    std::int64_t bump(std::string op, const std::string& key, const std::string& container);

    std::mutex mu_;
    std::int64_t epoch_ = 0;
    std::map<std::string, std::string> agents_;
    std::map<std::string, std::string> containers_;
    std::vector<DirectoryChange> history_;
};

// Name of the pseudo-agent that receives directory requests.
inline constexpr const char* k_directory_receiver = "$directory";

// Talks to a LocalDirectory hosted by another container through message frames
// addressed to "$directory"; results come back in the ack body.
class RemoteDirectory final : public Directory {
public:
    RemoteDirectory(Transport& transport, std::string address, Bytes secret, std::string caller);

    std::int64_t register_container(const std::string& id, const std::string& address) override;
    std::int64_t unregister_container(const std::string& id) override;
    std::optional<std::string> container_address(const std::string& id) override;
    std::vector<std::string> containers() override;

    std::int64_t bind(const std::string& agent, const std::string& container) override;
    std::int64_t rebind(const std::string& agent, const std::string& container) override;
    std::int64_t unbind(const std::string& agent) override;
    std::optional<Resolution> resolve(const std::string& agent) override;

    std::int64_t epoch() override;
    std::map<std::string, std::string> entries() override;

private:
    Value call(Value request);

    Transport& transport_;
    std::string address_;
    Bytes secret_;
    std::string caller_;
    std::mutex mu_;
    std::int64_t seq_ = 0;
};

} // namespace agentest::runtime
