#include "agentest/agentest.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <httplib.h>

#include "core/log.hpp"
#include "gateway/gateway.hpp"
#include "sas/deployment.hpp"
#include "sas/fixtures.hpp"
#include "sim/harness.hpp"
#include "store/files.hpp"

struct agentest_deployment {
    std::unique_ptr<agentest::sas::Deployment> d;
};

struct agentest_gateway {
    agentest::sas::Deployment* d = nullptr;
    std::unique_ptr<agentest::gateway::Gateway> g;
};

namespace {

using agentest::Errc;

thread_local std::string t_error;
thread_local std::string t_code;

int status_of(Errc c)
{
    switch (c) {
    case Errc::invalid_argument:
    case Errc::invalid_window: return AGENTEST_E_INVALID_ARGUMENT;
    case Errc::parse_error: return AGENTEST_E_PARSE;
    case Errc::schema_error:
    case Errc::invalid_question:
    case Errc::missing_answer:
    case Errc::unknown_question:
    case Errc::invalid_model: return AGENTEST_E_SCHEMA;
    case Errc::io_error: return AGENTEST_E_IO;
    case Errc::not_found: return AGENTEST_E_NOT_FOUND;
    case Errc::timeout: return AGENTEST_E_TIMEOUT;
    case Errc::address_in_use: return AGENTEST_E_ADDRESS_IN_USE;
    case Errc::internal: return AGENTEST_E_INTERNAL;
    default: return AGENTEST_E_OTHER;
    }
}

int set_error(int status, std::string code, std::string message)
{
    t_code = std::move(code);
    t_error = std::move(message);
    return status;
}

template <class F>
int guarded(F&& f)
{
    t_error.clear();
    t_code.clear();
    try {
        f();
        return AGENTEST_OK;
    } catch (const agentest::Error& e) {
        return set_error(status_of(e.code()), std::string(e.code_name()), e.what());
    } catch (const std::exception& e) {
        return set_error(AGENTEST_E_INTERNAL, "internal", e.what());
    } catch (...) {
        return set_error(AGENTEST_E_INTERNAL, "internal", "unknown exception");
    }
}

char* dup(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out)
        throw std::bad_alloc();
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

void need(const void* p, const char* what)
{
    if (!p)
        agentest::fail(Errc::invalid_argument, std::string(what) + " is null");
}

} // namespace

extern "C" {

const char* agentest_version(void)
{
    return "0.1.0";
}

const char* agentest_last_error(void)
{
    return t_error.c_str();
}

const char* agentest_last_error_code(void)
{
    return t_code.c_str();
}

void agentest_string_free(char* s)
{
    std::free(s);
}

int agentest_set_log_level(const char* level)
{
    return guarded([&] {
        need(level, "level");
        auto l = spdlog::level::from_str(level);
        if (l == spdlog::level::off && std::strcmp(level, "off") != 0)
            agentest::fail(Errc::invalid_argument, std::string("unknown log level '") + level + "'");
        agentest::log().set_level(l);
    });
}

int agentest_sim_run(const char* scenario_path, const char* transcript_path, char** bundle_json, int* passed)
{
    return guarded([&] {
        need(scenario_path, "scenario_path");
        auto scenario = agentest::sim::Scenario::load(scenario_path);
        auto bundle = agentest::sim::run_scenario(scenario);
        if (passed)
            *passed = bundle.ok() ? 1 : 0;
        std::string text = bundle.json();
        if (transcript_path && *transcript_path)
            agentest::store::write_file_atomic(transcript_path, text);
        if (bundle_json)
            *bundle_json = dup(text);
    });
}

int agentest_validate(const char* fixtures_dir, char** report_json)
{
    return guarded([&] {
        need(fixtures_dir, "fixtures_dir");
        auto set = agentest::sas::load_fixtures(fixtures_dir);
        if (report_json)
            *report_json = dup(agentest::to_json(agentest::sas::counts_value(set.counts())).dump());
    });
}

int agentest_seed(const char* fixtures_dir, const char* store_dir, char** counts_json)
{
    return guarded([&] {
        need(fixtures_dir, "fixtures_dir");
        need(store_dir, "store_dir");
        auto set = agentest::sas::load_fixtures(fixtures_dir);
        agentest::store::DocumentStore store(store_dir, std::make_shared<agentest::SystemClock>());
        auto counts = agentest::sas::seed(set, store);
        if (counts_json)
            *counts_json = dup(agentest::to_json(agentest::sas::counts_value(counts)).dump());
    });
}

int agentest_deployment_open(const char* config_path, agentest_deployment** out)
{
    return guarded([&] {
        need(config_path, "config_path");
        need(out, "out");
        auto config = agentest::sas::DeploymentConfig::load(config_path);
        if (!std::getenv("AGENTEST_LOG") && !config.log_level.empty())
            agentest::log().set_level(spdlog::level::from_str(config.log_level));
        auto h = std::make_unique<agentest_deployment>();
        h->d = std::make_unique<agentest::sas::Deployment>(std::move(config));
        *out = h.release();
    });
}

int agentest_deployment_start(agentest_deployment* d)
{
    return guarded([&] {
        need(d, "deployment");
        d->d->start();
    });
}

void agentest_deployment_close(agentest_deployment* d)
{
    if (!d)
        return;
    guarded([&] { d->d->stop(); });
    delete d;
}

int agentest_gateway_open(agentest_deployment* d, agentest_gateway** out)
{
    return guarded([&] {
        need(d, "deployment");
        need(out, "out");
        auto h = std::make_unique<agentest_gateway>();
        h->d = d->d.get();
        h->g = std::make_unique<agentest::gateway::Gateway>(*d->d);
        *out = h.release();
    });
}

int agentest_gateway_bind(agentest_gateway* g, const char* host, int port, int* bound_port)
{
    return guarded([&] {
        need(g, "gateway");
        const auto& http = g->d->config().http;
        int p = g->g->bind(host ? host : http.host, port < 0 ? http.port : port);
        if (bound_port)
            *bound_port = p;
    });
}

int agentest_gateway_run(agentest_gateway* g)
{
    return guarded([&] {
        need(g, "gateway");
        g->g->run();
    });
}

void agentest_gateway_stop(agentest_gateway* g)
{
    if (g)
        g->g->stop();
}

int agentest_gateway_handle(agentest_gateway* g, const char* method, const char* path, const char* query,
                            const char* body, const char* authorization, int* http_status,
                            char** response_json)
{
    return guarded([&] {
        need(g, "gateway");
        need(method, "method");
        need(path, "path");
        agentest::gateway::HttpRequest r;
        r.method = method;
        r.path = path;
        if (query && *query) {
            httplib::Params params;
            httplib::detail::parse_query_text(query, params);
            for (const auto& [k, v] : params)
                r.query[k] = v;
        }
        r.body = body ? body : "";
        r.authorization = authorization ? authorization : "";
        auto resp = g->g->handle(r);
        if (http_status)
            *http_status = resp.status;
        if (response_json)
            *response_json = dup(resp.body.dump());
    });
}

void agentest_gateway_close(agentest_gateway* g)
{
    delete g;
}

} // extern "C"
