#include <csignal>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <pthread.h>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "agentest/agentest.h"

namespace {

constexpr int k_ok = 0;
constexpr int k_failed = 1;
constexpr int k_input = 2;

struct Owned {
    char* p = nullptr;
    ~Owned() { agentest_string_free(p); }
};

int report_error(const char* what)
{
    std::cerr << "agentest " << what << ": " << agentest_last_error_code() << ": " << agentest_last_error() << "\n";
    return k_input;
}

int sim_run(const std::string& scenario, const std::string& transcript)
{
    Owned bundle;
    int passed = 0;
    if (agentest_sim_run(scenario.c_str(), transcript.empty() ? nullptr : transcript.c_str(), &bundle.p, &passed) != AGENTEST_OK)
        return report_error("sim run");
    auto doc = nlohmann::json::parse(bundle.p);
    for (const auto& c : doc["checks"]) {
        std::cout << (c["ok"].get<bool>() ? "PASS " : "FAIL ") << c["name"].get<std::string>();
        if (!c["ok"].get<bool>() && c.contains("detail") && !c["detail"].get<std::string>().empty())
            std::cout << ": " << c["detail"].get<std::string>();
        std::cout << "\n";
    }
    std::cout << (passed ? "scenario passed" : "scenario FAILED") << " at t=" << doc.value("final_time_ms", 0) << "ms\n";
    return passed ? k_ok : k_failed;
}

int validate(const std::string& dir)
{
    Owned report;
    if (agentest_validate(dir.c_str(), &report.p) != AGENTEST_OK)
        return report_error("validate");
    std::cout << report.p << "\n";
    return k_ok;
}

int seed(const std::string& dir, std::string store)
{
    if (store.empty()) {
        const char* env = std::getenv("AGENTEST_STORE");
        store = env && *env ? env : "data/store";
    }
    Owned counts;
    if (agentest_seed(dir.c_str(), store.c_str(), &counts.p) != AGENTEST_OK)
        return report_error("seed");
    std::cout << counts.p << "\n";
    return k_ok;
}

int serve(const std::string& config, const std::string& host, int port)
{
    // signals go to the waiter thread only
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    agentest_deployment* d = nullptr;
    if (agentest_deployment_open(config.c_str(), &d) != AGENTEST_OK)
        return report_error("serve");
    std::unique_ptr<agentest_deployment, void (*)(agentest_deployment*)> dep(d, agentest_deployment_close);
    agentest_gateway* g = nullptr;
    if (agentest_deployment_start(d) != AGENTEST_OK || agentest_gateway_open(d, &g) != AGENTEST_OK)
        return report_error("serve");
    std::unique_ptr<agentest_gateway, void (*)(agentest_gateway*)> gw(g, agentest_gateway_close);
    int bound = 0;
    if (agentest_gateway_bind(g, host.empty() ? nullptr : host.c_str(), port, &bound) != AGENTEST_OK)
        return report_error("serve");
    std::cout << "listening on port " << bound << std::endl;

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&set, &sig);
        agentest_gateway_stop(g);
    });
    int rc = agentest_gateway_run(g);
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    if (rc != AGENTEST_OK)
        return report_error("serve");
    return k_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"agentest: mobile-agent student assessment service"};
    app.require_subcommand(1);
    std::string log_level;
    app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

    std::string config, host;
    int port = -1;
    auto* serve_cmd = app.add_subcommand("serve", "run the deployment and its HTTP gateway");
    serve_cmd->add_option("--config", config, "deployment config file")->required();
    serve_cmd->add_option("--host", host, "override http.host");
    serve_cmd->add_option("--port", port, "override http.port");

    std::string scenario, transcript;
    auto* sim_cmd = app.add_subcommand("sim", "scenario harness");
    sim_cmd->require_subcommand(1);
    auto* run_cmd = sim_cmd->add_subcommand("run", "run a scenario and check it");
    run_cmd->add_option("scenario", scenario, "scenario JSON file")->required();
    run_cmd->add_option("--transcript", transcript, "write the transcript bundle here");

    std::string dir, store;
    auto* seed_cmd = app.add_subcommand("seed", "load a fixture directory into the store");
    seed_cmd->add_option("dir", dir, "fixture directory")->required();
    seed_cmd->add_option("--store", store, "store directory (default $AGENTEST_STORE or data/store)");

    auto* validate_cmd = app.add_subcommand("validate", "check a fixture directory");
    validate_cmd->add_option("dir", dir, "fixture directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? k_ok : k_input;
    }
    if (!log_level.empty() && agentest_set_log_level(log_level.c_str()) != AGENTEST_OK)
        return report_error("--log-level");

    if (*serve_cmd)
        return serve(config, host, port);
    if (*run_cmd)
        return sim_run(scenario, transcript);
    if (*seed_cmd)
        return seed(dir, store);
    if (*validate_cmd)
        return validate(dir);
    return k_input;
}
