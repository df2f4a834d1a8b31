#pragma once

// CSV artifacts: a `# schema:` comment naming columns and units, then a
// header row and data rows.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "hexkerr/error.hpp"

namespace hexkerr {

struct Column {
  std::string name;
  std::string unit;  // "1" for dimensionless
};

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<Column> columns) : path_(path), columns_(std::move(columns)) {
    if (path.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(path.parent_path(), ec);
      if (ec) throw Error(ErrorCode::Io, "cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    out_.open(path);
    if (!out_) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "' for writing");
    out_ << "# schema:";
    for (const auto& c : columns_) out_ << ' ' << c.name << '[' << c.unit << ']';
    out_ << '\n';
    for (std::size_t k = 0; k < columns_.size(); ++k) out_ << (k ? "," : "") << columns_[k].name;
    out_ << '\n';
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) throw Error(ErrorCode::InvalidArgument, "CSV row width differs from schema");
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
    out_ << '\n';
    if (!out_) throw Error(ErrorCode::Io, "write failed for '" + path_.string() + "'");
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (const double v : values) cells.push_back(format_number(v));
    row(cells);
  }

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::vector<Column> columns_;
  std::ofstream out_;
};

}  // namespace hexkerr
