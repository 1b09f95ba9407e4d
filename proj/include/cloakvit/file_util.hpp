#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cloakvit {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
std::string read_file_text(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so a failed
/// write never leaves a partial output behind.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

/// Sibling temporary path used by write_file_atomic and write_png.
std::filesystem::path temp_sibling(const std::filesystem::path& path);

}  // namespace cloakvit
