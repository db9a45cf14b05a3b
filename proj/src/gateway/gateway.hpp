#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include <json.hpp>

#include "sas/deployment.hpp"

namespace httplib {
class Server;
}

namespace agentest::gateway {

struct HttpRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
    std::string authorization; // "Bearer <token>"
};

struct HttpResponse {
    int status = 200;
    nlohmann::json body = nlohmann::json::object();
};

struct ApiSession {
    std::string token;
    std::string user;
    std::string role;
    std::string paa;
};

// HTTP status for an error code.
int http_status(Errc code);

// The HTTP boundary. handle() is the whole API; serve() only puts httplib in
// front of it. Holds nothing but login sessions.
class Gateway {
public:
    explicit Gateway(sas::Deployment& deployment);
    ~Gateway();

    HttpResponse handle(const HttpRequest& request);

    // Binds (port 0 picks a free one) and returns the bound port.
    int bind(const std::string& host, int port);
    // Serves until stop().
    void run();
    void stop();

private:
    HttpResponse route(const HttpRequest& r);
    ApiSession authenticate(const HttpRequest& r);
    std::mutex& user_lock(const std::string& user);

    HttpResponse login(const HttpRequest& r);
    HttpResponse tests(const ApiSession& s, const HttpRequest& r, const std::string& id);
    HttpResponse exams(const ApiSession& s, const HttpRequest& r);
    HttpResponse exam_results(const ApiSession& s, const std::string& exam_id);
    HttpResponse start_self_assessment(const ApiSession& s, const HttpRequest& r);
    HttpResponse list_sessions(const ApiSession& s);
    HttpResponse session_verb(const ApiSession& s, const HttpRequest& r, const std::string& id, const std::string& verb);
    HttpResponse results(const ApiSession& s, const HttpRequest& r);

    // UI action through the caller's assistant, then the SA's reply to it.
    Value relay(const ApiSession& s, Value action);
    Value ack(const ApiSession& s, Value action);

    sas::Deployment& d_;
    std::mutex mu_;
    std::map<std::string, ApiSession> by_token_;
    std::map<std::string, std::string> token_of_;
    std::map<std::string, std::unique_ptr<std::mutex>> user_locks_;
    std::unique_ptr<httplib::Server> server_;
};

} // namespace agentest::gateway
