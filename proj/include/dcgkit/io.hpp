#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcgkit/core.hpp"

namespace dcgkit::io {

// CSV layout: first row holds column labels (its first cell is a corner
// label), first column holds row labels. Empty cells and '-' are gaps.
// Cells may also be nucleotide letters, which map to codes A=1 G=2 C=5 T=6.
struct CsvTable {
  std::string corner;
  std::vector<std::string> col_labels;
  std::vector<std::string> row_labels;
  std::vector<std::vector<std::string>> cells;
};

CsvTable parse_csv(std::string_view text);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// `kind` unset means infer: binary if every cell is 0/1, coded if every
// cell is in the default code set, real otherwise.
DataMatrix matrix_from_csv(std::string_view text, std::optional<MatrixKind> kind = std::nullopt);
DataMatrix read_matrix(const std::filesystem::path& path, std::optional<MatrixKind> kind = std::nullopt);
std::string matrix_to_csv(const DataMatrix& m, std::string_view corner = "");

DistanceMatrix distance_from_csv(std::string_view text);
DistanceMatrix read_distance(const std::filesystem::path& path);

// Square labelled grid (distance, similarity, sharing matrices).
std::string square_to_csv(const std::vector<std::string>& labels, const std::vector<double>& values);
std::string distance_to_csv(const DistanceMatrix& d);

std::string format_number(double v);

}  // namespace dcgkit::io
