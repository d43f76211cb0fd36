#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace hiformer::io {

/// Versioned binary file: 8-byte magic, u32 version, u64 header length, a JSON
/// header, u64 payload length, then the payload as little-endian doubles and a
/// trailing FNV-1a checksum of the payload bytes.
struct Container {
  nlohmann::json header;
  std::vector<double> payload;
};

void write_container(const std::filesystem::path& path, std::string_view magic, std::uint32_t version,
                     const nlohmann::json& header, std::span<const double> payload);

/// Throws DataError on a missing, truncated or corrupted file, or when magic
/// or version do not match.
Container read_container(const std::filesystem::path& path, std::string_view magic, std::uint32_t version);

}  // namespace hiformer::io
