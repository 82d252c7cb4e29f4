#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "shc/data.hpp"
#include "shc/error.hpp"
#include "shc/expression.hpp"

// Delimited numeric matrix readers/writers. The delimiter comes from the
// extension: .csv is comma separated, anything else tab separated.
//
// Expression files are genes x samples: the first row holds a corner cell
// plus sample ids, each following row a gene id plus values. Observation
// files are plain numeric matrices with an optional header row of column
// labels and an optional first column of row labels (both detected from
// non-numeric cells).

namespace shc {
namespace detail {

inline char delimiter_for(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot != std::string::npos) {
    std::string ext = path.substr(dot + 1);
    for (char& c : ext) c = static_cast<char>(std::tolower(c));
    if (ext == "csv") return ',';
  }
  return '\t';
}

inline std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, delim)) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == delim) cells.emplace_back();
  return cells;
}

inline bool parse_double(const std::string& cell, double& out) {
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end != begin && (*(end - 1) == ' ' || *(end - 1) == '\t')) --end;
  if (begin == end) return false;
  auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

inline std::vector<std::vector<std::string>> read_cells(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open file: " + path);
  const char delim = delimiter_for(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_line(line, delim));
  }
  if (rows.empty()) throw ParseError(path + ": empty file");
  return rows;
}

inline std::string format_cell(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline ExpressionMatrix read_expression(const std::string& path) {
  const auto rows = detail::read_cells(path);
  if (rows.size() < 2)
    throw ParseError(path + ": expression file needs a header and >= 1 gene row");
  const std::size_t width = rows[0].size();
  if (width < 2)
    throw ParseError(path + ": expression header needs >= 1 sample column");

  ExpressionMatrix out;
  out.sample_ids.assign(rows[0].begin() + 1, rows[0].end());
  const int n_genes = static_cast<int>(rows.size()) - 1;
  const int n_samples = static_cast<int>(width) - 1;
  out.values.resize(n_genes, n_samples);
  for (int g = 0; g < n_genes; ++g) {
    const auto& row = rows[static_cast<std::size_t>(g + 1)];
    const int line_no = g + 2;
    if (row.size() != width)
      throw ParseError(path + ":" + std::to_string(line_no) + ": ragged row (" +
                       std::to_string(row.size()) + " cells, expected " +
                       std::to_string(width) + ")");
    out.gene_ids.push_back(row[0]);
    for (int c = 0; c < n_samples; ++c) {
      double v = 0.0;
      if (!detail::parse_double(row[static_cast<std::size_t>(c + 1)], v))
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": non-numeric cell '" + row[static_cast<std::size_t>(c + 1)] +
                         "' in column " + std::to_string(c + 2));
      out.values(g, c) = v;
    }
  }
  out.validate();
  return out;
}

inline DataMatrix read_observations(const std::string& path) {
  const auto rows = detail::read_cells(path);

  // Header row: present when any cell of the first line is non-numeric.
  double tmp = 0.0;
  bool has_header = false;
  for (const auto& cell : rows[0])
    if (!detail::parse_double(cell, tmp)) {
      has_header = true;
      break;
    }
  const std::size_t first_data = has_header ? 1 : 0;
  if (first_data >= rows.size())
    throw ParseError(path + ": no data rows");

  // Row labels: present when the first cell of the first data row is
  // non-numeric.
  const bool has_row_labels =
      !detail::parse_double(rows[first_data][0], tmp);

  const std::size_t width = rows[first_data].size();
  const int p = static_cast<int>(width) - (has_row_labels ? 1 : 0);
  if (p < 1) throw ParseError(path + ": no numeric columns");
  const int n = static_cast<int>(rows.size() - first_data);

  DataMatrix out;
  out.values.resize(n, p);
  std::vector<std::string> row_labels;
  for (int i = 0; i < n; ++i) {
    const auto& row = rows[first_data + static_cast<std::size_t>(i)];
    const int line_no = static_cast<int>(first_data) + i + 1;
    if (row.size() != width)
      throw ParseError(path + ":" + std::to_string(line_no) + ": ragged row (" +
                       std::to_string(row.size()) + " cells, expected " +
                       std::to_string(width) + ")");
    if (has_row_labels) row_labels.push_back(row[0]);
    for (int j = 0; j < p; ++j) {
      const auto& cell = row[static_cast<std::size_t>(j + (has_row_labels ? 1 : 0))];
      double v = 0.0;
      if (!detail::parse_double(cell, v))
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": non-numeric cell '" + cell + "' in column " +
                         std::to_string(j + 1 + (has_row_labels ? 1 : 0)));
      out.values(i, j) = v;
    }
  }
  if (has_row_labels) out.row_labels = std::move(row_labels);
  if (has_header) {
    auto header = rows[0];
    if (header.size() == width && has_row_labels)
      header.erase(header.begin());  // corner cell
    if (static_cast<int>(header.size()) != p)
      throw ParseError(path + ":1: header width does not match data");
    out.col_labels = std::move(header);
  }
  out.validate();
  return out;
}

inline void write_expression(const ExpressionMatrix& expr,
                             const std::string& path) {
  expr.validate();
  const char delim = detail::delimiter_for(path);
  std::ostringstream out;
  out << "gene_id";
  for (const auto& s : expr.sample_ids) out << delim << s;
  out << '\n';
  for (int g = 0; g < expr.n_genes(); ++g) {
    out << expr.gene_ids[static_cast<std::size_t>(g)];
    for (int c = 0; c < expr.n_samples(); ++c)
      out << delim << detail::format_cell(expr.values(g, c));
    out << '\n';
  }
  if (path == "-") {
    std::fputs(out.str().c_str(), stdout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write file: " + path);
  f << out.str();
}

inline void write_observations(const DataMatrix& data, const std::string& path) {
  data.validate();
  const char delim = detail::delimiter_for(path);
  std::ostringstream out;
  if (data.col_labels) {
    if (data.row_labels) out << "id" << delim;
    for (int j = 0; j < data.n_vars(); ++j) {
      if (j) out << delim;
      out << (*data.col_labels)[static_cast<std::size_t>(j)];
    }
    out << '\n';
  }
  for (int i = 0; i < data.n_obs(); ++i) {
    if (data.row_labels) out << (*data.row_labels)[static_cast<std::size_t>(i)] << delim;
    for (int j = 0; j < data.n_vars(); ++j) {
      if (j) out << delim;
      out << detail::format_cell(data.values(i, j));
    }
    out << '\n';
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write file: " + path);
  f << out.str();
}

}  // namespace shc
