#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace mmturn {

/// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// 64-bit FNV-1a, used for checkpoint ids.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace mmturn
