#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/clock.hpp"
#include "core/error.hpp"
#include "core/value.hpp"

namespace agentest::store {

enum class EntityKind { test, question, expert_answer, schedule, result, user };

inline constexpr EntityKind k_all_kinds[] = {EntityKind::test, EntityKind::question, EntityKind::expert_answer,
                                             EntityKind::schedule, EntityKind::result, EntityKind::user};

std::string_view to_string(EntityKind k);
std::optional<EntityKind> entity_kind_from(std::string_view s);

struct Entity {
    EntityKind kind = EntityKind::test;
    std::string id;
    std::int64_t version = 0; // 0 on put means "create"
    Value body = Value::map();
};

class VersionConflict : public Error {
public:
    VersionConflict(const std::string& detail, std::int64_t current)
        : Error(Errc::version_conflict, detail), current_(current) {}
    // Version currently stored, 0 when the entity does not exist.
    std::int64_t current() const noexcept { return current_; }

private:
    std::int64_t current_;
};

// Dotted body path -> required value.
using Filter = std::map<std::string, Value>;

// One JSON document per entity at <root>/<kind>/<id>.json holding
// {"version": n, "body": {...}}. Byte-string leaves are stored as base64 text.
class DocumentStore {
public:
    explicit DocumentStore(std::filesystem::path root, std::shared_ptr<Clock> clock = std::make_shared<SystemClock>());

    // Create when version is 0 (conflict if it exists), otherwise update when
    // version equals the stored one. Returns the stored version.
    std::int64_t put(const Entity& e);
    Entity get(EntityKind kind, const std::string& id) const;
    std::optional<Entity> find(EntityKind kind, const std::string& id) const;
    std::vector<Entity> list(EntityKind kind, const Filter& filter = {}) const;
    // Tests referenced by a schedule whose window has not closed stay put.
    void remove(EntityKind kind, const std::string& id);

    const std::filesystem::path& root() const { return root_; }
    std::size_t count(EntityKind kind) const { return list(kind).size(); }

private:
    std::filesystem::path file_of(EntityKind kind, const std::string& id) const;
    std::optional<Entity> load(EntityKind kind, const std::string& id) const;

    std::filesystem::path root_;
    std::shared_ptr<Clock> clock_;
    mutable std::mutex write_mu_;
};

// Throws Error(invalid_argument) for ids unusable as file names.
void check_entity_id(std::string_view id);

} // namespace agentest::store
