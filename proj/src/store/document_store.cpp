#include "store/document_store.hpp"

#include <algorithm>

#include "store/files.hpp"

namespace agentest::store {

namespace fs = std::filesystem;

std::string_view to_string(EntityKind k)
{
    switch (k) {
    case EntityKind::test: return "test";
    case EntityKind::question: return "question";
    case EntityKind::expert_answer: return "expert_answer";
    case EntityKind::schedule: return "schedule";
    case EntityKind::result: return "result";
    case EntityKind::user: return "user";
    }
    return "?";
}

std::optional<EntityKind> entity_kind_from(std::string_view s)
{
    for (auto k : k_all_kinds)
        if (to_string(k) == s)
            return k;
    return std::nullopt;
}

void check_entity_id(std::string_view id)
{
    bool ok = !id.empty() && id.size() <= 200 && id.front() != '.';
    for (char c : id)
        ok = ok && ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.' || c == ':' || c == '@');
    if (!ok)
        fail(Errc::invalid_argument, "entity id '" + std::string(id) + "' must match [A-Za-z0-9._:@-]+");
}

DocumentStore::DocumentStore(fs::path root, std::shared_ptr<Clock> clock)
    : root_(std::move(root)), clock_(std::move(clock))
{
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec)
        fail(Errc::io_error, "create " + root_.string() + ": " + ec.message());
}

fs::path DocumentStore::file_of(EntityKind kind, const std::string& id) const
{
    check_entity_id(id);
    return root_ / std::string(to_string(kind)) / (id + ".json");
}

std::optional<Entity> DocumentStore::load(EntityKind kind, const std::string& id) const
{
    auto text = read_file(file_of(kind, id));
    if (!text)
        return std::nullopt;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(*text);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::io_error, "corrupt document " + file_of(kind, id).string() + ": " + e.what());
    }
    if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_number_integer() || !doc.contains("body"))
        fail(Errc::io_error, "document " + file_of(kind, id).string() + " lacks version/body");
    return Entity{kind, id, doc["version"].get<std::int64_t>(), from_json(doc["body"])};
}

std::int64_t DocumentStore::put(const Entity& e)
{
    if (!e.body.is_map())
        fail(Errc::invalid_argument, "entity body must be a map");
    std::lock_guard lock(write_mu_);
    auto current = load(e.kind, e.id);
    std::int64_t stored = current ? current->version : 0;
    if (e.version != stored)
        throw VersionConflict(std::string(to_string(e.kind)) + " '" + e.id + "' is at version " +
                                  std::to_string(stored) + ", update was based on " + std::to_string(e.version),
                              stored);
    nlohmann::json doc{{"version", stored + 1}, {"body", to_json(e.body)}};
    write_file_atomic(file_of(e.kind, e.id), doc.dump(2) + "\n");
    return stored + 1;
}

std::optional<Entity> DocumentStore::find(EntityKind kind, const std::string& id) const
{
    return load(kind, id);
}

Entity DocumentStore::get(EntityKind kind, const std::string& id) const
{
    auto e = load(kind, id);
    if (!e)
        fail(Errc::not_found, std::string(to_string(kind)) + " '" + id + "' not found");
    return *e;
}

std::vector<Entity> DocumentStore::list(EntityKind kind, const Filter& filter) const
{
    std::vector<std::string> ids;
    fs::path dir = root_ / std::string(to_string(kind));
    std::error_code ec;
    if (fs::is_directory(dir, ec)) {
        for (const auto& f : fs::directory_iterator(dir, ec)) {
            auto name = f.path().filename().string();
            if (f.is_regular_file() && name.ends_with(".json") && name.front() != '.')
                ids.push_back(name.substr(0, name.size() - 5));
        }
    }
    std::sort(ids.begin(), ids.end());
    std::vector<Entity> out;
    for (const auto& id : ids) {
        auto e = load(kind, id);
        if (!e)
            continue;
        bool match = std::all_of(filter.begin(), filter.end(), [&](const auto& kv) {
            auto* v = e->body.find_path(kv.first);
            return v && *v == kv.second;
        });
        if (match)
            out.push_back(std::move(*e));
    }
    return out;
}

void DocumentStore::remove(EntityKind kind, const std::string& id)
{
    std::lock_guard lock(write_mu_);
    fs::path p = file_of(kind, id);
    std::error_code ec;
    if (!fs::exists(p, ec))
        fail(Errc::not_found, std::string(to_string(kind)) + " '" + id + "' not found");
    if (kind == EntityKind::test) {
        const auto now = clock_->now_ms();
        for (const auto& s : list(EntityKind::schedule, {{"test_id", Value(id)}})) {
            if (s.body.get_int("window_close") > now && !s.body.get_bool("closed"))
                fail(Errc::referential_in_use,
                     "test '" + id + "' is used by exam '" + s.id + "' whose window is still open or upcoming");
        }
    }
    if (!fs::remove(p, ec) || ec)
        fail(Errc::io_error, "remove " + p.string() + ": " + (ec ? ec.message() : "failed"));
}

} // namespace agentest::store
