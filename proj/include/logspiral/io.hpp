#pragma once

/// File output utilities shared by the command-line tools: lossless float
/// formatting, CSV assembly, atomic writes, and the run id hash that links
/// every artifact of one invocation.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace logspiral {

/// 17 significant digits round-trip any 64-bit float.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvBuilder {
 public:
  explicit CsvBuilder(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void comment(const std::string& text) { comments_.push_back(text); }

  CsvBuilder& begin_row() {
    rows_.emplace_back();
    return *this;
  }
  CsvBuilder& add(double v) {
    rows_.back().push_back(format_g17(v));
    return *this;
  }
  CsvBuilder& add(const std::string& v) {
    rows_.back().push_back(v);
    return *this;
  }

  std::string str() const {
    std::string out;
    for (const auto& c : comments_) out += "# " + c + "\n";
    for (size_t i = 0; i < columns_.size(); ++i)
      out += columns_[i] + (i + 1 < columns_.size() ? "," : "\n");
    for (const auto& row : rows_) {
      if (row.size() != columns_.size())
        throw std::logic_error("csv row width does not match the header");
      for (size_t i = 0; i < row.size(); ++i)
        out += row[i] + (i + 1 < row.size() ? "," : "\n");
    }
    return out;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::vector<std::string>> rows_;
};

/// Write-to-temp-then-rename so readers never observe a half-written file.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace logspiral
