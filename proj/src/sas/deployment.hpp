#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "runtime/platform.hpp"
#include "sas/agents.hpp"
#include "store/document_store.hpp"

namespace agentest::sas {

struct ContainerSpec {
    std::string id;
    std::string listen = "in-process";
    std::string directory = "in-process";
    bool host_directory = false;
    std::filesystem::path spool_dir; // default <spool>/<id>
};

struct UserSpec {
    std::string id;
    std::string role; // student | instructor | admin
    std::string credential;
    std::string container;
};

struct HttpSpec {
    std::string host = "127.0.0.1";
    int port = 8080;
    std::int64_t request_timeout_ms = 5000;
    std::int64_t question_wait_ms = 1000;
};

// One layered configuration file for a whole deployment.
struct DeploymentConfig {
    std::string secret;
    std::string server_container = "server";
    std::vector<ContainerSpec> containers;
    std::vector<UserSpec> users;
    std::filesystem::path store;
    std::filesystem::path fixtures; // seeded at boot when set
    std::filesystem::path spool = "spool";
    bool simulated_clock = false;
    std::int64_t tick_ms = 100;
    SasSettings sas;
    HttpSpec http;
    std::string log_level = "info";

    const UserSpec* user(const std::string& id) const;
    // Throws invalid_argument.
    void validate() const;

    // Relative paths are taken against `base`.
    static DeploymentConfig from_json(const nlohmann::json& doc, const std::filesystem::path& base = {});
    // Reads the file, then applies AGENTEST_STORE, AGENTEST_SECRET and AGENTEST_HTTP_PORT.
    static DeploymentConfig load(const std::filesystem::path& file);
};

std::string paa_name(const UserSpec& u);

// Containers, store and stationary agents of a running service. In simulated
// mode the owner drives it through pump(); otherwise every container has a
// worker thread after start().
class Deployment {
public:
    explicit Deployment(DeploymentConfig config);
    ~Deployment();

    Deployment(const Deployment&) = delete;
    Deployment& operator=(const Deployment&) = delete;

    void start();
    void stop();

    const DeploymentConfig& config() const { return config_; }
    runtime::Platform& platform() { return *platform_; }
    store::DocumentStore& store() { return *store_; }
    std::shared_ptr<store::DocumentStore> store_ptr() { return store_; }

    // Sends a UI action to the user's assistant; returns its ui_id.
    std::string ui(const std::string& user, Value action);
    // Copy of the assistant's desk; nullopt when it is not reachable.
    std::optional<Value> desk(const std::string& user);
    std::optional<Value> ack(const std::string& user, const std::string& ui_id);

    // Runs (simulated) or waits (real) until pred holds or timeout_ms of clock
    // time pass. True when pred held.
    bool pump(const std::function<bool()>& pred, std::int64_t timeout_ms);
    // One simulated step: a tick round, or a clock advance of tick_ms when idle.
    void step();

    // Acknowledgement of a UI action, pumping until it is there. Throws timeout.
    Value wait_ack(const std::string& user, const std::string& ui_id, std::int64_t timeout_ms);

private:
    runtime::Container& container_of(const std::string& user);

    DeploymentConfig config_;
    std::unique_ptr<runtime::Platform> platform_;
    std::shared_ptr<store::DocumentStore> store_;
    std::atomic<std::int64_t> ui_counter_{0};
    std::mutex pump_mu_;
    bool workers_ = false;
};

} // namespace agentest::sas
