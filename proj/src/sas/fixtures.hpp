#pragma once

#include <filesystem>
#include <map>
#include <vector>

#include "store/document_store.hpp"

namespace agentest::sas {

// Parsed and checked contents of a fixture directory:
//   questions/*.json  one question each, with its expert answer under "answer"
//   tests/*.json      one test each
//   users/*.json      {id, role}
//   schedules/*.json  exam schedules
struct FixtureSet {
    std::vector<store::Entity> entities;

    std::map<store::EntityKind, std::int64_t> counts() const;
};

// Throws Error(schema_error) naming the offending file, or invalid_argument
// when `dir` is not a directory.
FixtureSet load_fixtures(const std::filesystem::path& dir);

// Writes every fixture entity (replacing existing ones) and returns the counts.
std::map<store::EntityKind, std::int64_t> seed(const FixtureSet& set, store::DocumentStore& store);

Value counts_value(const std::map<store::EntityKind, std::int64_t>& counts);

} // namespace agentest::sas
