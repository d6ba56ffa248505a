#pragma once

// Minimal CSV I/O: comma-separated, one header row, LF line endings, doubles
// printed with 17 significant digits so that they round-trip exactly.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sld/error.hpp"

namespace sld::csv {

inline std::string format(double x) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(n));
}

inline double parse(std::string_view text) {
  // std::from_chars for double is available in libstdc++ 11.
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  while (first < last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) throw ValidationError("csv: cannot parse number '" + std::string(text) + "'");
  return value;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw ValidationError("csv: missing column '" + std::string(name) + "'");
  }

  [[nodiscard]] std::vector<double> values(std::string_view name) const {
    const auto c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
};

class Writer {
public:
  Writer(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw ValidationError("csv: cannot open '" + path.string() + "' for writing");
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out_ << ',';
      out_ << header[i];
    }
    out_ << '\n';
  }

  void row(std::initializer_list<double> values) { row(std::vector<double>(values)); }

  void row(const std::vector<double>& values) {
    bool first = true;
    for (double v : values) {
      if (!first) out_ << ',';
      out_ << format(v);
      first = false;
    }
    out_ << '\n';
  }

  /// Row with a leading free-text field (used for labelled summaries).
  void labelled_row(std::string_view label, const std::vector<double>& values) {
    out_ << label;
    for (double v : values) out_ << ',' << format(v);
    out_ << '\n';
  }

private:
  std::ofstream out_;
  std::filesystem::path path_;
};

inline Table read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("csv: cannot open '" + path.string() + "'");
  Table t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream ss(s);
    while (std::getline(ss, cur, ',')) parts.push_back(cur);
    return parts;
  };
  if (!std::getline(in, line)) throw ValidationError("csv: empty file '" + path.string() + "'");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto parts = split(line);
    if (parts.size() != t.header.size()) throw ValidationError("csv: ragged row in '" + path.string() + "'");
    std::vector<double> row;
    row.reserve(parts.size());
    for (const auto& p : parts) row.push_back(parse(p));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace sld::csv
