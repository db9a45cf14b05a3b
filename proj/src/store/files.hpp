#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace agentest::store {

// Writes `content` to a temporary sibling, flushes it to disk, then renames it
// over `path`, so readers see either the old or the new file. Creates parent
// directories. Throws Error(io_error).
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Whole file, or nullopt when it does not exist. Throws Error(io_error).
std::optional<std::string> read_file(const std::filesystem::path& path);

// Deletes a directory tree; errors are ignored.
void remove_tree(const std::filesystem::path& path) noexcept;

} // namespace agentest::store
