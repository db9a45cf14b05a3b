#include "behavior/task_model.hpp"

#include <fstream>
#include <set>
#include <tuple>

namespace agentest::behavior {

namespace {

constexpr std::string_view k_performatives[] = {"request", "inform", "agree", "refuse", "failure"};

std::string join_issues(const std::string& task, const std::vector<ModelIssue>& issues)
{
    std::string out = "task model '" + task + "' is invalid:";
    for (const auto& i : issues)
        out += " [" + i.kind + "] " + i.detail + ";";
    return out;
}

// Root variable of a "$path" reference, or empty for literals.
std::string reference_root(const std::string& s)
{
    if (s.size() < 2 || s[0] != '$' || s[1] == '$')
        return {};
    auto path = s.substr(1);
    return path.substr(0, path.find('.'));
}

void collect_refs(const Value& v, std::vector<std::string>& out)
{
    switch (v.kind()) {
    case Value::Kind::string:
        if (auto r = reference_root(v.as_string()); !r.empty())
            out.push_back(r);
        break;
    case Value::Kind::list:
        for (const auto& i : v.as_list())
            collect_refs(i, out);
        break;
    case Value::Kind::map:
        for (const auto& [k, i] : v.as_map())
            collect_refs(i, out);
        break;
    default:
        break;
    }
}

} // namespace

ModelValidationError::ModelValidationError(std::string task, std::vector<ModelIssue> issues)
    : Error(Errc::invalid_model, join_issues(task, issues)), issues_(std::move(issues))
{
}

const State* ValidatedTaskModel::state(std::string_view name) const
{
    auto it = state_index_.find(name);
    return it == state_index_.end() ? nullptr : &model_.states[it->second];
}

bool ValidatedTaskModel::declares(std::string_view var) const
{
    if (var == k_event_var)
        return true;
    for (const auto& v : model_.context_vars)
        if (v == var)
            return true;
    return false;
}

ModelPtr validate_model(TaskModel model)
{
    std::vector<ModelIssue> issues;
    auto add = [&](std::string kind, std::string detail) {
        issues.push_back({std::move(kind), std::move(detail)});
    };

    std::set<std::string, std::less<>> declared(model.context_vars.begin(), model.context_vars.end());
    declared.insert(std::string(k_event_var));
    auto check_var = [&](const std::string& var, const std::string& where) {
        if (!declared.contains(var))
            add("unknown-variable", "'" + var + "' used in " + where + " is not a declared context variable");
    };

    if (model.task_name.empty())
        add("empty-name", "task name is empty");

    auto result = std::make_shared<ValidatedTaskModel>();
    for (std::size_t i = 0; i < model.states.size(); ++i) {
        const auto& s = model.states[i];
        if (s.name.empty() || s.name == k_failed_state)
            add("bad-state", "state name '" + s.name + "' is reserved or empty");
        if (!result->state_index_.emplace(s.name, i).second)
            add("duplicate-state", "state '" + s.name + "' declared twice");
        for (const auto& a : s.activities) {
            if (a.name.empty())
                add("bad-activity", "state '" + s.name + "' has an activity without a name");
            for (const auto& p : a.params)
                check_var(p.substr(0, p.find('.')), "activity '" + a.name + "' parameters");
            if (!a.result.empty())
                check_var(a.result, "activity '" + a.name + "' result");
        }
    }

    if (!result->state_index_.contains(model.initial_state))
        add("dangling-state", "initial state '" + model.initial_state + "' is not declared");

    std::set<std::tuple<std::string, std::string, std::string>> seen;
    for (std::size_t i = 0; i < model.transitions.size(); ++i) {
        auto& t = model.transitions[i];
        if (t.trigger == "ε" || t.trigger == "epsilon")
            t.trigger.clear();
        std::string label = "transition #" + std::to_string(i) + " (" + t.from + " -> " + t.to + ")";
        if (!result->state_index_.contains(t.from))
            add("dangling-state", label + ": source state '" + t.from + "' is not declared");
        if (!result->state_index_.contains(t.to))
            add("dangling-state", label + ": target state '" + t.to + "' is not declared");
        if (!seen.emplace(t.from, t.trigger, t.guard).second)
            add("duplicate-transition", label + " repeats (from, trigger, guard)");

        Guard g;
        try {
            g = Guard::parse(t.guard);
            for (const auto& v : g.variables())
                check_var(v, label + " guard");
        } catch (const Error& e) {
            add("bad-guard", label + ": " + e.detail());
        }
        result->guards_.push_back(std::move(g));

        for (const auto& tx : t.transmissions) {
            if (tx.target.empty())
                add("bad-transmission", label + ": transmission without a target");
            if (tx.event.empty())
                add("bad-transmission", label + ": transmission without an event name");
            std::vector<std::string> refs;
            collect_refs(tx.payload, refs);
            collect_refs(Value(tx.target), refs);
            collect_refs(Value(tx.conversation), refs);
            for (const auto& r : refs)
                check_var(r, label + " transmission");
            if (tx.kind == TransmissionKind::external_message) {
                bool known = false;
                for (auto p : k_performatives)
                    known = known || tx.performative == p;
                if (!known)
                    add("bad-transmission", label + ": unknown performative '" + tx.performative + "'");
            } else if (!reference_root(tx.target).empty()) {
                add("bad-transmission", label + ": internal targets must name a task literally");
            }
        }
    }

    if (!issues.empty())
        throw ModelValidationError(model.task_name, std::move(issues));
    result->model_ = std::move(model);
    return result;
}

// ---------------------------------------------------------------------------
// document form

namespace {

std::string str_field(const nlohmann::json& j, const char* key, const std::string& ctx)
{
    if (!j.contains(key) || !j[key].is_string())
        fail(Errc::schema_error, ctx + ": missing string field '" + key + "'");
    return j[key].get<std::string>();
}

std::vector<std::string> str_list(const nlohmann::json& j, const char* key, const std::string& ctx)
{
    std::vector<std::string> out;
    if (!j.contains(key))
        return out;
    if (!j[key].is_array())
        fail(Errc::schema_error, ctx + ": field '" + key + "' must be a list of strings");
    for (const auto& s : j[key]) {
        if (!s.is_string())
            fail(Errc::schema_error, ctx + ": field '" + key + "' must be a list of strings");
        out.push_back(s.get<std::string>());
    }
    return out;
}

} // namespace

TaskModel task_model_from_json(const nlohmann::json& doc)
{
    if (!doc.is_object())
        fail(Errc::schema_error, "task model document must be an object");
    TaskModel m;
    m.task_name = str_field(doc, "task", "task model");
    std::string ctx = "task '" + m.task_name + "'";
    m.initial_state = str_field(doc, "initial", ctx);
    m.context_vars = str_list(doc, "context", ctx);

    if (!doc.contains("states") || !doc["states"].is_array())
        fail(Errc::schema_error, ctx + ": missing 'states' list");
    for (const auto& js : doc["states"]) {
        State s;
        s.name = str_field(js, "name", ctx + " state");
        for (const auto& ja : js.value("activities", nlohmann::json::array())) {
            Activity a;
            a.name = str_field(ja, "name", ctx + " activity");
            a.params = str_list(ja, "params", ctx + " activity");
            a.result = ja.value("result", std::string{});
            s.activities.push_back(std::move(a));
        }
        m.states.push_back(std::move(s));
    }

    for (const auto& jt : doc.value("transitions", nlohmann::json::array())) {
        Transition t;
        t.from = str_field(jt, "from", ctx + " transition");
        t.to = str_field(jt, "to", ctx + " transition");
        t.trigger = jt.value("trigger", std::string{});
        t.guard = jt.value("guard", std::string{});
        for (const auto& jx : jt.value("transmissions", nlohmann::json::array())) {
            Transmission tx;
            auto kind = str_field(jx, "kind", ctx + " transmission");
            if (kind == "external_message")
                tx.kind = TransmissionKind::external_message;
            else if (kind == "internal_event")
                tx.kind = TransmissionKind::internal_event;
            else
                fail(Errc::schema_error, ctx + ": unknown transmission kind '" + kind + "'");
            tx.target = str_field(jx, "target", ctx + " transmission");
            tx.event = str_field(jx, "event", ctx + " transmission");
            tx.performative = jx.value("performative", std::string(
                tx.kind == TransmissionKind::external_message ? "inform" : ""));
            tx.conversation = jx.value("conversation", std::string{});
            tx.payload = jx.contains("payload") ? from_json(jx["payload"]) : Value::map();
            t.transmissions.push_back(std::move(tx));
        }
        m.transitions.push_back(std::move(t));
    }
    return m;
}

nlohmann::json task_model_to_json(const TaskModel& m)
{
    nlohmann::json doc;
    doc["task"] = m.task_name;
    doc["initial"] = m.initial_state;
    doc["context"] = m.context_vars;
    doc["states"] = nlohmann::json::array();
    for (const auto& s : m.states) {
        nlohmann::json js{{"name", s.name}, {"activities", nlohmann::json::array()}};
        for (const auto& a : s.activities)
            js["activities"].push_back({{"name", a.name}, {"params", a.params}, {"result", a.result}});
        doc["states"].push_back(std::move(js));
    }
    doc["transitions"] = nlohmann::json::array();
    for (const auto& t : m.transitions) {
        nlohmann::json jt{{"from", t.from}, {"to", t.to}, {"trigger", t.trigger.empty() ? "ε" : t.trigger},
                          {"guard", t.guard}, {"transmissions", nlohmann::json::array()}};
        for (const auto& tx : t.transmissions) {
            nlohmann::json jx{
                {"kind", tx.kind == TransmissionKind::external_message ? "external_message" : "internal_event"},
                {"target", tx.target},
                {"event", tx.event},
                {"payload", to_json(tx.payload)}};
            if (tx.kind == TransmissionKind::external_message) {
                jx["performative"] = tx.performative;
                if (!tx.conversation.empty())
                    jx["conversation"] = tx.conversation;
            }
            jt["transmissions"].push_back(std::move(jx));
        }
        doc["transitions"].push_back(std::move(jt));
    }
    return doc;
}

TaskModel load_task_model(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(Errc::io_error, "cannot open task model '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::parse_error, path + ": " + e.what());
    }
    return task_model_from_json(doc);
}

} // namespace agentest::behavior
