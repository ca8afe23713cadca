#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace skewdiff {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

/// Writes via a temporary file in the same directory and renames it into place, so a
/// reader never sees a partial file. Creates missing parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace skewdiff
