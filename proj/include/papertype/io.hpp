#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "papertype/core.hpp"

namespace papertype {

using json = nlohmann::json;

// Version of every file format written by this library.
inline constexpr int kFormatVersion = 1;

// 64-bit FNV-1a, used for config and output fingerprints.
constexpr std::uint64_t fnv1a(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xF];
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes through a sibling temp file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IngestError("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IngestError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

// Header line prepended to line-delimited outputs. Readers skip it.
inline json format_header(std::string_view content, std::string_view config_hash) {
  return json{{"format_version", kFormatVersion},
              {"content", std::string(content)},
              {"config_hash", std::string(config_hash)}};
}

inline bool is_format_header(const json& j) {
  return j.is_object() && j.contains("format_version") && !j.contains("id") &&
         !j.contains("query_id") && !j.contains("doc_id");
}

}  // namespace papertype
