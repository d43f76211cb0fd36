#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace hiformer::io {

/// Writes through a sibling temp file and renames it over `path`, so readers
/// see either the previous file or the complete new one.
void write_file_atomic(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer,
                       bool binary = false);

std::string read_file(const std::filesystem::path& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);
/// FNV-1a of the file contents as 16 hex digits.
std::string file_fingerprint(const std::filesystem::path& path);

/// Splits one CSV record on commas and trims surrounding whitespace and
/// carriage returns. Quoted fields are not supported.
std::vector<std::string> split_csv(std::string_view line);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace hiformer::io
