// Copyright (c) 2026 the qpend authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpend {

/// 17 significant digits: enough for exact double round-trips.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

inline std::string format_int(long v) { return std::to_string(v); }

/// Rectangular table rendered as CSV, preceded by `# key = value` provenance
/// comment lines. Cells are pre-rendered strings; rows are written in input
/// order, so identical tables produce byte-identical files.
struct Table {
  std::vector<std::pair<std::string, std::string>> provenance;  // key, value
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_provenance(const std::string& key, const std::string& value) {
    provenance.emplace_back(key, value);
  }
  void add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size())
      throw std::invalid_argument("Table: row width does not match column count");
    rows.push_back(std::move(cells));
  }
};

inline void write_csv(const Table& t, std::ostream& os) {
  for (const auto& [k, v] : t.provenance) os << "# " << k << " = " << v << "\n";
  for (std::size_t c = 0; c < t.columns.size(); ++c)
    os << t.columns[c] << (c + 1 < t.columns.size() ? "," : "");
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      os << row[c] << (c + 1 < row.size() ? "," : "");
    os << "\n";
  }
}

inline void write_csv_file(const Table& t, const std::string& path) {
  std::ofstream os(path, std::ios::binary);  // \n endings on every platform
  if (!os) throw std::ios_base::failure("cannot open output file: " + path);
  write_csv(t, os);
  os.flush();
  if (!os) throw std::ios_base::failure("write failed: " + path);
}

}  // namespace qpend
