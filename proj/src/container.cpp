#include "hiformer/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hiformer/error.hpp"
#include "hiformer/io_util.hpp"

namespace hiformer::io {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

namespace {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(const std::string& bytes, std::size_t& pos, const std::filesystem::path& path) {
  if (pos + sizeof(T) > bytes.size()) throw DataError(path.string() + ": truncated file");
  T v;
  std::memcpy(&v, bytes.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace

void write_container(const std::filesystem::path& path, std::string_view magic, std::uint32_t version,
                     const nlohmann::json& header, std::span<const double> payload) {
  if (magic.size() != 8) throw ContractError("container magic must be 8 bytes");
  const std::string text = header.dump();
  const std::string_view raw(reinterpret_cast<const char*>(payload.data()), payload.size_bytes());
  write_file_atomic(
      path,
      [&](std::ostream& os) {
        os.write(magic.data(), 8);
        put<std::uint32_t>(os, version);
        put<std::uint64_t>(os, text.size());
        os.write(text.data(), static_cast<std::streamsize>(text.size()));
        put<std::uint64_t>(os, payload.size());
        os.write(raw.data(), static_cast<std::streamsize>(raw.size()));
        put<std::uint64_t>(os, fnv1a(raw));
      },
      true);
}

Container read_container(const std::filesystem::path& path, std::string_view magic, std::uint32_t version) {
  if (!std::filesystem::exists(path)) throw DataError("file not found: " + path.string());
  const std::string bytes = read_file(path);
  std::size_t pos = 0;
  if (bytes.size() < 8 || std::string_view(bytes.data(), 8) != magic) {
    throw DataError(path.string() + ": not a " + std::string(magic) + " file");
  }
  pos = 8;
  const auto file_version = take<std::uint32_t>(bytes, pos, path);
  if (file_version != version) {
    throw DataError(path.string() + ": unsupported version " + std::to_string(file_version) + " (expected " +
                    std::to_string(version) + ")");
  }
  const auto header_len = take<std::uint64_t>(bytes, pos, path);
  if (pos + header_len > bytes.size()) throw DataError(path.string() + ": truncated file");
  Container out;
  try {
    out.header = nlohmann::json::parse(bytes.substr(pos, header_len));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": corrupt header: " + e.what());
  }
  pos += header_len;
  const auto count = take<std::uint64_t>(bytes, pos, path);
  if (count > (bytes.size() - pos) / sizeof(double)) throw DataError(path.string() + ": truncated file");
  const std::string_view raw(bytes.data() + pos, count * sizeof(double));
  out.payload.resize(count);
  std::memcpy(out.payload.data(), raw.data(), raw.size());
  pos += raw.size();
  const auto checksum = take<std::uint64_t>(bytes, pos, path);
  if (checksum != fnv1a(raw)) throw DataError(path.string() + ": payload checksum mismatch");
  if (pos != bytes.size()) throw DataError(path.string() + ": trailing bytes after payload");
  return out;
}

}  // namespace hiformer::io
