#pragma once

// Plain-text formats shared by the CLI and the plotting scripts.
//
//   matrix: CSV of reals, one matrix row per line, no header
//   mask:   one "i,j" pair per line, zero-based

#include <filesystem>
#include <string>
#include <vector>

#include "mclab/core.hpp"

namespace mclab::io {

Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);

IndexSet read_mask(const std::filesystem::path& path, int rows, int cols);
void write_mask(const IndexSet& mask, const std::filesystem::path& path);

// Splits one CSV line on commas; no quoting support.
std::vector<std::string> split_csv_line(const std::string& line);
double parse_double(const std::string& field, const std::string& context);
long long parse_int(const std::string& field, const std::string& context);

// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

}  // namespace mclab::io
