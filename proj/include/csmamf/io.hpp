#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "csmamf/errors.hpp"

namespace csmamf {

// Writes through a temporary file and renames, so partially written outputs
// never appear under the final name.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write to " + tmp.string());
    out << content;
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// Comma-separated output with a header row; one comment line up front
/// carries the config hash and seed for provenance.
class CsvWriter {
public:
  CsvWriter(const std::string& header, const std::string& config_hash, std::uint64_t seed) {
    body_ += "# config_hash=" + config_hash + " seed=" + std::to_string(seed) + "\n";
    body_ += header + "\n";
  }

  template <typename... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    (append_field(fields, first), ...);
    body_ += "\n";
  }

  const std::string& str() const { return body_; }

private:
  void append_field(double v, bool& first) {
    if (!first) body_ += ",";
    body_ += format_double(v);
    first = false;
  }
  void append_field(int v, bool& first) {
    if (!first) body_ += ",";
    body_ += std::to_string(v);
    first = false;
  }
  void append_field(long v, bool& first) {
    if (!first) body_ += ",";
    body_ += std::to_string(v);
    first = false;
  }
  void append_field(std::uint64_t v, bool& first) {
    if (!first) body_ += ",";
    body_ += std::to_string(v);
    first = false;
  }
  void append_field(const std::string& v, bool& first) {
    if (!first) body_ += ",";
    body_ += v;
    first = false;
  }

  std::string body_;
};

}  // namespace csmamf
