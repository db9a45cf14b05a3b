#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sim/scenario.hpp"

namespace agentest::sim {

struct Check {
    std::string name;
    bool ok = false;
    std::string detail;
};

struct Bundle {
    Value value; // transcripts, sessions, results, store, directory, spool, checks
    std::vector<Check> checks;

    bool ok() const;
    std::string json() const; // stable text, byte-identical across identical runs
};

struct RunOptions {
    std::filesystem::path work_dir; // empty: a fresh temporary directory, removed afterwards
};

Bundle run_scenario(const Scenario& scenario, const RunOptions& options = {});

// <root>/<relative path> -> bytes, for every file below root.
std::map<std::string, std::string> tree_bytes(const std::filesystem::path& root);

} // namespace agentest::sim
