#include "jgl/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace jgl {

namespace {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_cell(const std::string& cell, const std::string& path, std::size_t line) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end != nullptr && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
  if (end == begin || end == nullptr || *end != '\0') {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": not a number: '" + cell + "'");
  }
  return v;
}

}  // namespace

Matrix read_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(parse_cell(cell, path, lineno));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": ragged row, expected " +
                               std::to_string(rows.front().size()) + " cells");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty matrix");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return m;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void write_csv_matrix(const std::string& path, const Matrix& m) {
  std::string buf;
  buf.reserve(static_cast<std::size_t>(m.size()) * 20);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) buf += ',';
      buf += format_value(m(i, j));
    }
    buf += '\n';
  }
  write_text_atomic(path, buf);
}

void write_edge_list(const std::string& path, const PrecisionSet& estimate) {
  std::string buf = "class,i,j,value,kind\n";
  for (std::size_t k = 0; k < estimate.size(); ++k) {
    const Matrix& t = estimate[k];
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < t.cols(); ++j) {
        if (t(i, j) == 0.0) continue;
        bool common = true;
        for (const Matrix& other : estimate) common = common && other(i, j) != 0.0;
        buf += std::to_string(k + 1) + ',' + std::to_string(i + 1) + ',' + std::to_string(j + 1) +
               ',' + format_value(t(i, j)) + ',' + (common ? "common" : "specific") + '\n';
      }
    }
  }
  write_text_atomic(path, buf);
}

}  // namespace jgl
