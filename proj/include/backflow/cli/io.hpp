#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "backflow/errors.hpp"

namespace backflow::cli {

using json = nlohmann::json;

/// Shortest round-trip form is not required; 17 significant digits always are.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Writes `content` next to `path` and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Column-major numeric table with a `name[unit]` header.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(const std::vector<double>& row) {
    require(row.size() == header_.size(), "CsvTable: row width differs from header");
    rows_.push_back(row);
  }

  [[nodiscard]] std::size_t rows() const { return rows_.size(); }

  [[nodiscard]] std::string render() const {
    std::string s;
    for (std::size_t i = 0; i < header_.size(); ++i) {
      if (i) s += ',';
      s += header_[i];
    }
    s += '\n';
    for (const auto& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) s += ',';
        s += format_double(row[i]);
      }
      s += '\n';
    }
    return s;
  }

  void write(const std::filesystem::path& path) const { write_atomic(path, render()); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

/// nlohmann::json objects keep keys sorted, so the dump is stable.
inline void write_json(const std::filesystem::path& path, const json& j) { write_atomic(path, j.dump(2) + "\n"); }

}  // namespace backflow::cli
