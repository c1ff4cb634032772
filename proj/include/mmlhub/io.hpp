#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace mmlhub {

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

void append_line(const std::filesystem::path& path, std::string_view line);

std::string sha256_hex(std::string_view data);

/// Current UTC time as ISO-8601 with second precision, e.g. 2024-01-31T12:00:00Z.
std::string utc_timestamp();

}  // namespace mmlhub
