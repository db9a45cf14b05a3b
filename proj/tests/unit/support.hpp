#pragma once

#include <filesystem>
#include <random>
#include <string>

namespace test_support {

inline const std::filesystem::path k_source_dir = AGENTEST_SOURCE_DIR;

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "t")
    {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("agentest-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

private:
    std::filesystem::path path_;
};

} // namespace test_support
