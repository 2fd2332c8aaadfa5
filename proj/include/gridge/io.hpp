#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gridge/apps.hpp"
#include "gridge/matcore.hpp"

namespace gridge::io {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Splits one CSV line; double quotes group fields and "" escapes a quote.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return errno == 0 && end == s.c_str() + s.size() && std::isfinite(out);
}

inline bool all_numeric(const std::vector<std::string>& row) {
  double v;
  for (const auto& f : row)
    if (!parse_double(f, v)) return false;
  return true;
}

/// Reads a CSV file. With `header` unset, the first row is treated as a
/// header when any of its fields is non-numeric.
inline CsvTable read_csv(const std::string& path, std::optional<bool> header = std::nullopt) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::InputError, "cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (first) {
      first = false;
      const bool is_header = header.has_value() ? *header : !all_numeric(fields);
      if (is_header) {
        t.header = std::move(fields);
        continue;
      }
    }
    t.rows.push_back(std::move(fields));
  }
  const std::size_t width = t.header.empty() ? (t.rows.empty() ? 0 : t.rows[0].size())
                                             : t.header.size();
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    require(t.rows[r].size() == width, ErrorKind::InputError,
            path + ": row " + std::to_string(r + 1) + " has " + std::to_string(t.rows[r].size()) +
                " fields, expected " + std::to_string(width));
  return t;
}

/// Numeric block of the given columns. Errors name the 1-based data row and column.
inline Matrix numeric_columns(const CsvTable& t, const std::vector<std::size_t>& cols,
                              const std::string& what = "input") {
  Matrix m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t k = 0; k < cols.size(); ++k) {
      double v;
      const auto& cell = t.rows[r][cols[k]];
      require(parse_double(cell, v), ErrorKind::InputError,
              what + ": non-numeric value '" + cell + "' at (row " + std::to_string(r + 1) +
                  ", col " + std::to_string(cols[k] + 1) + ")");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = v;
    }
  return m;
}

inline std::vector<std::size_t> column_range(std::size_t from, std::size_t to) {
  std::vector<std::size_t> out;
  for (std::size_t c = from; c < to; ++c) out.push_back(c);
  return out;
}

inline std::size_t width(const CsvTable& t) {
  return t.header.empty() ? (t.rows.empty() ? 0 : t.rows[0].size()) : t.header.size();
}

/// Observations as rows, every column numeric.
inline Matrix read_data_csv(const std::string& path, std::vector<std::string>* names = nullptr) {
  const CsvTable t = read_csv(path);
  require(!t.rows.empty(), ErrorKind::InputError, path + ": no data rows");
  if (names) *names = t.header.empty() ? default_labels(static_cast<Eigen::Index>(width(t))) : t.header;
  return numeric_columns(t, column_range(0, width(t)), path);
}

/// Square symmetric matrix, optional header row.
inline SymMatrix read_matrix_csv(const std::string& path) {
  const Matrix m = read_data_csv(path);
  require(m.rows() == m.cols(), ErrorKind::InputError, path + ": matrix is not square");
  try {
    return SymMatrix::checked(m, 1e-8);
  } catch (const Error& e) {
    fail(ErrorKind::InputError, path + ": " + e.what());
  }
}

/// Prices with an ISO-8601 date in the first column.
inline TimeSeries read_price_csv(const std::string& path) {
  const CsvTable t = read_csv(path, true);
  require(!t.rows.empty(), ErrorKind::InputError, path + ": no data rows");
  require(width(t) >= 2, ErrorKind::InputError, path + ": need a date column and prices");
  TimeSeries ts;
  ts.names.assign(t.header.begin() + 1, t.header.end());
  for (const auto& row : t.rows) ts.dates.push_back(parse_date(row[0]));
  for (std::size_t i = 1; i < ts.dates.size(); ++i)
    require(ts.dates[i] > ts.dates[i - 1], ErrorKind::InputError,
            path + ": dates must be strictly increasing (row " + std::to_string(i + 1) + ")");
  ts.values = numeric_columns(t, column_range(1, width(t)), path);
  return ts;
}

inline std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::InputError, "cannot write '" + path.string() + "'");
  return out;
}

inline void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                             const std::vector<std::string>& header = {}) {
  auto out = open_out(path);
  if (!header.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << quote(header[j]);
    out << "\n";
  }
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << fmt(m(i, j));
    out << "\n";
  }
}

inline void write_edges_csv(const std::filesystem::path& path, const EdgeList& g) {
  auto out = open_out(path);
  out << "source,target,weight\n";
  for (const auto& e : g.edges)
    out << quote(g.nodes[static_cast<std::size_t>(e.i)]) << ","
        << quote(g.nodes[static_cast<std::size_t>(e.j)]) << "," << fmt(e.weight) << "\n";
}

}  // namespace gridge::io
