#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "stoclab/common.hpp"

namespace stoclab {

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  int column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<int>(i);
    return -1;
  }

  std::vector<double> column(int idx) const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(idx)]);
    return out;
  }
};

/// Round-trip exact, locale-independent formatting.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  require(out.good(), errc::config_parse_error, "cannot open " + path + " for writing");
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out << ',';
    out << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_double(row[i]);
    }
    out << '\n';
  }
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), errc::config_parse_error, "cannot open " + path);
  CsvTable table;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    if (header) {
      while (std::getline(ss, cell, ',')) table.columns.push_back(cell);
      header = false;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(errc::config_parse_error, "non-numeric cell '" + cell + "' in " + path);
      }
    }
    require(row.size() == table.columns.size(), errc::config_parse_error,
            "ragged row in " + path);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace stoclab
