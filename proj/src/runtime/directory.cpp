#include "runtime/directory.hpp"

#include "core/error.hpp"
#include "runtime/frame.hpp"
#include "runtime/message.hpp"
#include "runtime/transport.hpp"

namespace agentest::runtime {

std::int64_t LocalDirectory::bump(std::string op, const std::string& key, const std::string& container)
{
    ++epoch_;
    history_.push_back({epoch_, std::move(op), key, container});
    return epoch_;
}

std::int64_t LocalDirectory::register_container(const std::string& id, const std::string& address)
{
    std::lock_guard lock(mu_);
    if (id.empty())
        fail(Errc::invalid_argument, "container id must not be empty");
    if (containers_.contains(id))
        fail(Errc::duplicate_container, "container '" + id + "' is already registered");
    containers_.emplace(id, address);
    return bump("register", id, id);
}

std::int64_t LocalDirectory::unregister_container(const std::string& id)
{
    std::lock_guard lock(mu_);
    if (containers_.erase(id) == 0)
        fail(Errc::not_found, "container '" + id + "' is not registered");
    return bump("unregister", id, id);
}

std::optional<std::string> LocalDirectory::container_address(const std::string& id)
{
    std::lock_guard lock(mu_);
    auto it = containers_.find(id);
    if (it == containers_.end())
        return std::nullopt;
    return it->second;
}

std::vector<std::string> LocalDirectory::containers()
{
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, _] : containers_)
        out.push_back(id);
    return out;
}

std::int64_t LocalDirectory::bind(const std::string& agent, const std::string& container)
{
    std::lock_guard lock(mu_);
    if (agent.empty())
        fail(Errc::invalid_argument, "agent name must not be empty");
    if (agents_.contains(agent))
        fail(Errc::duplicate_agent, "agent '" + agent + "' already exists");
    if (!containers_.contains(container))
        fail(Errc::not_found, "container '" + container + "' is not registered");
    agents_.emplace(agent, container);
    return bump("bind", agent, container);
}

std::int64_t LocalDirectory::rebind(const std::string& agent, const std::string& container)
{
    std::lock_guard lock(mu_);
    auto it = agents_.find(agent);
    if (it == agents_.end())
        fail(Errc::not_found, "agent '" + agent + "' is not in the directory");
    if (!containers_.contains(container))
        fail(Errc::not_found, "container '" + container + "' is not registered");
    it->second = container;
    return bump("rebind", agent, container);
}

std::int64_t LocalDirectory::unbind(const std::string& agent)
{
    std::lock_guard lock(mu_);
    auto it = agents_.find(agent);
    if (it == agents_.end())
        fail(Errc::not_found, "agent '" + agent + "' is not in the directory");
    std::string c = it->second;
    agents_.erase(it);
    return bump("unbind", agent, c);
}

std::optional<Resolution> LocalDirectory::resolve(const std::string& agent)
{
    std::lock_guard lock(mu_);
    auto it = agents_.find(agent);
    if (it == agents_.end())
        return std::nullopt;
    return Resolution{it->second, epoch_};
}

std::int64_t LocalDirectory::epoch()
{
    std::lock_guard lock(mu_);
    return epoch_;
}

std::map<std::string, std::string> LocalDirectory::entries()
{
    std::lock_guard lock(mu_);
    return agents_;
}

std::vector<DirectoryChange> LocalDirectory::history()
{
    std::lock_guard lock(mu_);
    return history_;
}

Value LocalDirectory::handle(const Value& req)
{
    const std::string op = req.get_string("op");
    const std::string agent = req.get_string("agent");
    const std::string container = req.get_string("container");
    Value out = Value::map();
    if (op == "register_container") {
        out["epoch"] = register_container(container, req.get_string("address"));
    } else if (op == "unregister_container") {
        out["epoch"] = unregister_container(container);
    } else if (op == "container_address") {
        auto a = container_address(container);
        out["address"] = a ? Value(*a) : Value{};
    } else if (op == "containers") {
        Value l = Value::list();
        for (const auto& c : containers())
            l.push_back(c);
        out["containers"] = std::move(l);
    } else if (op == "bind") {
        out["epoch"] = bind(agent, container);
    } else if (op == "rebind") {
        out["epoch"] = rebind(agent, container);
    } else if (op == "unbind") {
        out["epoch"] = unbind(agent);
    } else if (op == "resolve") {
        if (auto r = resolve(agent)) {
            out["container"] = r->container;
            out["epoch"] = r->epoch;
        }
    } else if (op == "epoch") {
        out["epoch"] = epoch();
    } else if (op == "entries") {
        Value m = Value::map();
        for (const auto& [a, c] : entries())
            m[a] = c;
        out["entries"] = std::move(m);
    } else {
        fail(Errc::invalid_argument, "unknown directory op '" + op + "'");
    }
    return out;
}

// ---------------------------------------------------------------------------

RemoteDirectory::RemoteDirectory(Transport& transport, std::string address, Bytes secret, std::string caller)
    : transport_(transport), address_(std::move(address)), secret_(std::move(secret)), caller_(std::move(caller))
{
}

Value RemoteDirectory::call(Value request)
{
    Message m;
    m.sender = "$container:" + caller_;
    m.receiver = k_directory_receiver;
    m.performative = Performative::request;
    m.conversation = "directory";
    {
        std::lock_guard lock(mu_);
        m.seq = ++seq_;
    }
    m.payload = std::move(request);
    Bytes response;
    try {
        response = transport_.exchange(address_, encode_frame(FrameKind::message, m.to_value(), secret_));
    } catch (const Error& e) {
        fail(Errc::directory_unreachable, "directory at " + address_ + ": " + e.detail());
    }
    return expect_ack(decode_frame(response, secret_));
}

namespace {

Value op(std::string name)
{
    Value v = Value::map();
    v["op"] = std::move(name);
    return v;
}

} // namespace

std::int64_t RemoteDirectory::register_container(const std::string& id, const std::string& address)
{
    Value r = op("register_container");
    r["container"] = id;
    r["address"] = address;
    return call(std::move(r)).get_int("epoch");
}

std::int64_t RemoteDirectory::unregister_container(const std::string& id)
{
    Value r = op("unregister_container");
    r["container"] = id;
    return call(std::move(r)).get_int("epoch");
}

std::optional<std::string> RemoteDirectory::container_address(const std::string& id)
{
    Value r = op("container_address");
    r["container"] = id;
    Value out = call(std::move(r));
    if (auto* a = out.find("address"); a && a->is_string())
        return a->as_string();
    return std::nullopt;
}

std::vector<std::string> RemoteDirectory::containers()
{
    std::vector<std::string> out;
    Value v = call(op("containers"));
    if (auto* l = v.find("containers"); l && l->is_list())
        for (const auto& c : l->as_list())
            out.push_back(c.as_string());
    return out;
}

std::int64_t RemoteDirectory::bind(const std::string& agent, const std::string& container)
{
    Value r = op("bind");
    r["agent"] = agent;
    r["container"] = container;
    return call(std::move(r)).get_int("epoch");
}

std::int64_t RemoteDirectory::rebind(const std::string& agent, const std::string& container)
{
    Value r = op("rebind");
    r["agent"] = agent;
    r["container"] = container;
    return call(std::move(r)).get_int("epoch");
}

std::int64_t RemoteDirectory::unbind(const std::string& agent)
{
    Value r = op("unbind");
    r["agent"] = agent;
    return call(std::move(r)).get_int("epoch");
}

std::optional<Resolution> RemoteDirectory::resolve(const std::string& agent)
{
    Value r = op("resolve");
    r["agent"] = agent;
    Value out = call(std::move(r));
    auto* c = out.find("container");
    if (!c || !c->is_string())
        return std::nullopt;
    return Resolution{c->as_string(), out.get_int("epoch")};
}

std::int64_t RemoteDirectory::epoch()
{
    return call(op("epoch")).get_int("epoch");
}

std::map<std::string, std::string> RemoteDirectory::entries()
{
    std::map<std::string, std::string> out;
    Value v = call(op("entries"));
    if (auto* m = v.find("entries"); m && m->is_map())
        for (const auto& [a, c] : m->as_map())
            out.emplace(a, c.as_string());
    return out;
}

} // namespace agentest::runtime
