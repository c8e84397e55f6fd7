#pragma once

#include <string>
#include <vector>

#include "asr/types.hpp"

namespace asr {

// Flat binary format: little-endian 64-bit dims, then raw doubles
// (row-major for matrices). No magic, no alignment padding.
void save_vector(const std::string& path, const Vector& v);
Vector load_vector(const std::string& path);
void save_matrix(const std::string& path, const Matrix& m);
Matrix load_matrix(const std::string& path);

// Minimal CSV with a fixed header line; numbers are printed with 17
// significant digits so a round trip reproduces the exact doubles.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string format_double(double x);
void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

}  // namespace asr
