#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "core/value.hpp"

namespace acceptance {

using Rng = std::mt19937_64;

struct Outcome {
    bool ok = true;
    std::vector<std::string> facts;   // printed after the verdict
    std::vector<std::string> failures; // first few are printed

    void fact(std::string s) { facts.push_back(std::move(s)); }
    void fail(std::string s)
    {
        ok = false;
        if (failures.size() < 8)
            failures.push_back(std::move(s));
    }
    void expect(bool cond, const std::string& what)
    {
        if (!cond)
            fail(what);
    }
};

struct Criterion {
    const char* name;
    double limit_s;
    Outcome (*run)(Rng&);
};

Outcome statechart_semantics(Rng& rng);
Outcome migration_soundness(Rng& rng);
Outcome scoring_oracle(Rng& rng);
Outcome adaptive_policy(Rng& rng);
Outcome protocol_conformance(Rng& rng);
Outcome end_to_end_exam(Rng& rng);
Outcome crash_consistency(Rng& rng);

std::filesystem::path source_dir();
std::filesystem::path scenario(const std::string& name);

class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

int uniform(Rng& rng, int lo, int hi);
bool coin(Rng& rng, double p = 0.5);
std::string random_word(Rng& rng, int min_len = 1, int max_len = 8);
// Nested map/list/scalar mix without NaN.
agentest::Value random_value(Rng& rng, int depth);

} // namespace acceptance
