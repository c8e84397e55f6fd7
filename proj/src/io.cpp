#include "asr/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace asr {

namespace {

void write_i64(std::ofstream& out, std::int64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::int64_t read_i64(std::ifstream& in) {
  std::int64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("binary read: truncated header");
  return v;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

}  // namespace

void save_vector(const std::string& path, const Vector& v) {
  auto out = open_out(path, std::ios::binary);
  write_i64(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(sizeof(double)) * v.size());
}

Vector load_vector(const std::string& path) {
  auto in = open_in(path, std::ios::binary);
  std::int64_t n = read_i64(in);
  if (n < 0) throw std::runtime_error("binary read: negative length in " + path);
  Vector v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(sizeof(double)) * n);
  if (!in) throw std::runtime_error("binary read: truncated data in " + path);
  return v;
}

void save_matrix(const std::string& path, const Matrix& m) {
  auto out = open_out(path, std::ios::binary);
  write_i64(out, m.rows());
  write_i64(out, m.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      double x = m(i, j);
      out.write(reinterpret_cast<const char*>(&x), sizeof(x));
    }
}

Matrix load_matrix(const std::string& path) {
  auto in = open_in(path, std::ios::binary);
  std::int64_t rows = read_i64(in);
  std::int64_t cols = read_i64(in);
  if (rows < 0 || cols < 0)
    throw std::runtime_error("binary read: negative dims in " + path);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      double x = 0;
      in.read(reinterpret_cast<char*>(&x), sizeof(x));
      if (!in) throw std::runtime_error("binary read: truncated data in " + path);
      m(i, j) = x;
    }
  return m;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
  auto out = open_out(path, std::ios::out);
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out << ',';
    out << table.columns[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw std::runtime_error("write_csv: row width mismatch");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << '\n';
  }
}

CsvTable read_csv(const std::string& path) {
  auto in = open_in(path, std::ios::in);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file " + path);
  std::stringstream header(line);
  std::string cell;
  while (std::getline(header, cell, ',')) table.columns.push_back(cell);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != table.columns.size())
      throw std::runtime_error("read_csv: ragged row in " + path);
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace asr
