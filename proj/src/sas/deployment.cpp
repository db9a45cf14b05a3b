#include "sas/deployment.hpp"

#include <cstdlib>
#include <set>
#include <thread>

#include "core/log.hpp"
#include "sas/fixtures.hpp"
#include "store/files.hpp"

namespace agentest::sas {

namespace fs = std::filesystem;

const UserSpec* DeploymentConfig::user(const std::string& id) const
{
    for (const auto& u : users)
        if (u.id == id)
            return &u;
    return nullptr;
}

void DeploymentConfig::validate() const
{
    if (secret.size() < runtime::k_min_secret)
        fail(Errc::invalid_argument, "the shared secret needs at least " + std::to_string(runtime::k_min_secret) + " bytes");
    if (containers.empty())
        fail(Errc::invalid_argument, "no containers configured");
    std::set<std::string> ids;
    for (const auto& c : containers)
        if (c.id.empty() || !ids.insert(c.id).second)
            fail(Errc::invalid_argument, "container ids must be non-empty and distinct");
    if (!ids.contains(server_container))
        fail(Errc::invalid_argument, "server container '" + server_container + "' is not configured");
    if (store.empty())
        fail(Errc::invalid_argument, "no store directory configured");
    if (tick_ms < 1 || sas.poll_ms < 1)
        fail(Errc::invalid_argument, "tick_ms and poll_ms must be positive");
    std::set<std::string> names;
    for (const auto& u : users) {
        if (u.id.empty() || !names.insert(u.id).second)
            fail(Errc::invalid_argument, "user ids must be non-empty and distinct");
        if (u.role != "student" && u.role != "instructor" && u.role != "admin")
            fail(Errc::invalid_argument, "user '" + u.id + "' has unknown role '" + u.role + "'");
        if (!ids.contains(u.container))
            fail(Errc::invalid_argument, "user '" + u.id + "' lives on unknown container '" + u.container + "'");
    }
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p)
{
    if (p.empty())
        return {};
    fs::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

} // namespace

DeploymentConfig DeploymentConfig::from_json(const nlohmann::json& doc, const fs::path& base)
{
    if (!doc.is_object())
        fail(Errc::invalid_argument, "configuration must be a JSON object");
    DeploymentConfig c;
    try {
        c.secret = doc.value("secret", std::string{});
        if (auto env = doc.value("secret_env", std::string{}); !env.empty())
            if (const char* s = std::getenv(env.c_str()))
                c.secret = s;
        c.server_container = doc.value("server_container", c.server_container);
        for (const auto& j : doc.value("containers", nlohmann::json::array())) {
            ContainerSpec s;
            s.id = j.value("id", std::string{});
            s.listen = j.value("listen", s.listen);
            s.directory = j.value("directory", s.directory);
            s.host_directory = j.value("host_directory", false);
            s.spool_dir = resolve(base, j.value("spool_dir", std::string{}));
            c.containers.push_back(std::move(s));
        }
        for (const auto& j : doc.value("users", nlohmann::json::array())) {
            UserSpec u;
            u.id = j.value("id", std::string{});
            u.role = j.value("role", std::string{});
            u.credential = j.value("credential", std::string{});
            u.container = j.value("container", c.server_container);
            c.users.push_back(std::move(u));
        }
        c.store = resolve(base, doc.value("store", std::string{}));
        c.fixtures = resolve(base, doc.value("fixtures", std::string{}));
        c.spool = resolve(base, doc.value("spool", std::string("spool")));
        c.simulated_clock = doc.value("clock", std::string("real")) == "simulated";
        c.tick_ms = doc.value("tick_ms", c.tick_ms);
        c.sas.poll_ms = doc.value("poll_ms", c.sas.poll_ms);
        if (doc.contains("adaptive")) {
            const auto& a = doc["adaptive"];
            if (a.contains("start_difficulty") && !a["start_difficulty"].is_null())
                c.sas.defaults.start_difficulty = a["start_difficulty"].get<int>();
            if (a.contains("max_questions") && !a["max_questions"].is_null())
                c.sas.defaults.max_questions = a["max_questions"].get<int>();
        }
        if (doc.contains("http")) {
            const auto& h = doc["http"];
            c.http.host = h.value("host", c.http.host);
            c.http.port = h.value("port", c.http.port);
            c.http.request_timeout_ms = h.value("request_timeout_ms", c.http.request_timeout_ms);
            c.http.question_wait_ms = h.value("question_wait_ms", c.http.question_wait_ms);
        }
        c.log_level = doc.value("log_level", c.log_level);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::invalid_argument, std::string("configuration: ") + e.what());
    }
    return c;
}

DeploymentConfig DeploymentConfig::load(const fs::path& file)
{
    auto text = store::read_file(file);
    if (!text)
        fail(Errc::invalid_argument, "configuration file '" + file.string() + "' not found");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(*text);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, file.string() + ": " + e.what());
    }
    auto c = from_json(doc, file.parent_path());
    if (const char* s = std::getenv("AGENTEST_STORE"); s && *s)
        c.store = s;
    if (const char* s = std::getenv("AGENTEST_SECRET"); s && *s)
        c.secret = s;
    if (const char* s = std::getenv("AGENTEST_HTTP_PORT"); s && *s) {
        try {
            c.http.port = std::stoi(s);
        } catch (const std::exception&) {
            fail(Errc::invalid_argument, std::string("AGENTEST_HTTP_PORT='") + s + "' is not a port");
        }
    }
    return c;
}

std::string paa_name(const UserSpec& u)
{
    return u.role == "student" ? student_paa(u.id) : instructor_paa(u.id);
}

// ---------------------------------------------------------------------------

Deployment::Deployment(DeploymentConfig config) : config_(std::move(config))
{
    config_.validate();
    std::shared_ptr<Clock> clock;
    if (config_.simulated_clock)
        clock = std::make_shared<SimulatedClock>();
    else
        clock = std::make_shared<SystemClock>();
    platform_ = std::make_unique<runtime::Platform>(clock);
    store_ = std::make_shared<store::DocumentStore>(config_.store, clock);
    if (!config_.fixtures.empty())
        seed(load_fixtures(config_.fixtures), *store_);
    for (const auto& u : config_.users) {
        if (store_->find(store::EntityKind::user, u.id))
            continue;
        Value body = Value::map();
        body["id"] = u.id;
        body["role"] = u.role;
        store_->put({store::EntityKind::user, u.id, 0, body});
    }

    auto settings = std::make_shared<SasSettings>(config_.sas);
    Bytes secret(config_.secret.begin(), config_.secret.end());
    for (const auto& spec : config_.containers) {
        runtime::ContainerConfig cc;
        cc.id = spec.id;
        cc.listen_address = spec.listen;
        cc.shared_secret = secret;
        cc.directory_address = spec.directory;
        cc.host_directory = spec.host_directory;
        auto& c = platform_->start_container(cc);
        c.register_behavior(server_agent_behavior());
        c.register_behavior(personal_assistant_behavior());
        c.register_behavior(evaluation_agent_behavior());
        c.set_resource(k_settings_resource, settings);
        c.set_resource(k_spool_resource,
                       std::make_shared<fs::path>(spec.spool_dir.empty() ? config_.spool / spec.id : spec.spool_dir));
        if (spec.id == config_.server_container)
            c.set_resource(k_store_resource, store_);
    }
    platform_->container(config_.server_container).spawn(k_sa_behavior, Value::map(), k_sa_name);
    for (const auto& u : config_.users)
        platform_->container(u.container).spawn(k_paa_behavior, paa_init(u.id, u.role), paa_name(u));
}

Deployment::~Deployment()
{
    stop();
}

void Deployment::start()
{
    if (config_.simulated_clock || workers_)
        return;
    platform_->start_workers();
    workers_ = true;
}

void Deployment::stop()
{
    if (!workers_)
        return;
    platform_->stop_workers();
    workers_ = false;
}

runtime::Container& Deployment::container_of(const std::string& user)
{
    const UserSpec* u = config_.user(user);
    if (!u)
        fail(Errc::not_found, "no user '" + user + "'");
    return platform_->container(u->container);
}

std::string Deployment::ui(const std::string& user, Value action)
{
    auto& c = container_of(user);
    const UserSpec* u = config_.user(user);
    std::string ui_id = user + "-" + std::to_string(++ui_counter_);
    runtime::Message m;
    m.sender = ui_sender(user);
    m.receiver = paa_name(*u);
    m.performative = runtime::Performative::request;
    m.conversation = "ui:" + user;
    m.payload = action.is_map() ? std::move(action) : Value::map();
    m.payload["type"] = "ui";
    m.payload["ui_id"] = ui_id;
    c.send(std::move(m));
    return ui_id;
}

std::optional<Value> Deployment::desk(const std::string& user)
{
    auto& c = container_of(user);
    std::optional<Value> out;
    c.with_agent(paa_name(*config_.user(user)), [&](runtime::Agent& a) { out = a.data; });
    return out;
}

std::optional<Value> Deployment::ack(const std::string& user, const std::string& ui_id)
{
    auto& c = container_of(user);
    std::optional<Value> out;
    c.with_agent(paa_name(*config_.user(user)), [&](runtime::Agent& a) {
        if (auto* v = a.data.find_path("acks." + ui_id))
            out = *v;
    });
    return out;
}

void Deployment::step()
{
    if (!platform_->tick_all())
        if (auto* sc = platform_->simulated_clock())
            sc->advance(config_.tick_ms);
}

bool Deployment::pump(const std::function<bool()>& pred, std::int64_t timeout_ms)
{
    auto& clock = platform_->clock();
    if (clock.simulated()) {
        std::lock_guard lock(pump_mu_);
        const std::int64_t deadline = clock.now_ms() + timeout_ms;
        while (!pred()) {
            if (clock.now_ms() >= deadline)
                return false;
            step();
        }
        return true;
    }
    const std::int64_t deadline = clock.now_ms() + timeout_ms;
    while (!pred()) {
        if (clock.now_ms() >= deadline)
            return false;
        if (!workers_)
            platform_->tick_all();
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    return true;
}

Value Deployment::wait_ack(const std::string& user, const std::string& ui_id, std::int64_t timeout_ms)
{
    std::optional<Value> a;
    if (!pump([&] { return (a = ack(user, ui_id)).has_value(); }, timeout_ms))
        fail(Errc::timeout, "assistant of '" + user + "' did not acknowledge '" + ui_id + "'");
    return *a;
}

} // namespace agentest::sas
