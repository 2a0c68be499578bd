#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcgkit {

// Malformed or inconsistent input. The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MatrixKind { binary, coded, real };
enum class Axis { rows, cols };

const char* to_string(MatrixKind kind);
const char* to_string(Axis axis);

// Labelled m x n grid. A cell is either a number (real value or integer
// category code) or a gap.
class DataMatrix {
 public:
  static std::vector<int> default_codes() { return {1, 2, 5, 6}; }

  DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
             std::vector<std::uint8_t> gaps, std::vector<std::string> row_labels,
             std::vector<std::string> col_labels, MatrixKind kind,
             std::vector<int> codes = default_codes());

  // Gap-free convenience constructor with generated labels r0.., c0...
  static DataMatrix from_rows(const std::vector<std::vector<double>>& rows, MatrixKind kind,
                              std::vector<int> codes = default_codes());

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t extent(Axis axis) const { return axis == Axis::rows ? rows_ : cols_; }

  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  bool is_gap(std::size_t r, std::size_t c) const { return gaps_[r * cols_ + c] != 0; }
  bool has_gaps() const;

  MatrixKind kind() const { return kind_; }
  const std::vector<int>& codes() const { return codes_; }
  const std::vector<std::string>& row_labels() const { return row_labels_; }
  const std::vector<std::string>& col_labels() const { return col_labels_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<std::uint8_t>& gap_mask() const { return gaps_; }

  // Vector along `axis` with index i (a row when axis == rows).
  std::vector<double> vector_along(Axis axis, std::size_t i) const;

  DataMatrix transposed() const;
  DataMatrix select(std::span<const std::size_t> row_idx,
                    std::span<const std::size_t> col_idx) const;
  DataMatrix with_values(std::vector<double> values) const;

  bool operator==(const DataMatrix&) const = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
  std::vector<std::uint8_t> gaps_;
  std::vector<std::string> row_labels_;
  std::vector<std::string> col_labels_;
  MatrixKind kind_;
  std::vector<int> codes_;
};

class DistanceMatrix {
 public:
  // Validates symmetry (relative 1e-9), zero diagonal, finite and >= 0.
  DistanceMatrix(std::size_t n, std::vector<double> d, std::vector<std::string> labels);
  explicit DistanceMatrix(const std::vector<std::vector<double>>& d);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  const std::vector<double>& data() const { return d_; }
  const std::vector<std::string>& labels() const { return labels_; }

  double max() const;
  double median_offdiag() const;
  DistanceMatrix scaled(double factor) const;

  bool operator==(const DistanceMatrix&) const = default;

 private:
  std::size_t n_;
  std::vector<double> d_;
  std::vector<std::string> labels_;
};

// Cluster ids are canonical: numbered 0..k-1 in order of first appearance,
// so two partitions are equal iff their assignment vectors are equal.
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<int> labels);

  static Partition single(std::size_t n) { return Partition(std::vector<int>(n, 0)); }
  static Partition singletons(std::size_t n);

  std::size_t size() const { return assignment_.size(); }
  std::size_t k() const { return k_; }
  int operator[](std::size_t leaf) const { return assignment_[leaf]; }
  const std::vector<int>& assignment() const { return assignment_; }
  std::vector<std::vector<std::size_t>> members() const;
  std::vector<std::size_t> cluster_sizes() const;

  // True when every cluster of *this lies inside one cluster of `coarser`.
  bool refines(const Partition& coarser) const;

  bool operator==(const Partition&) const = default;

 private:
  std::vector<int> assignment_;
  std::size_t k_ = 0;
};

struct TreeLevel {
  double height;
  Partition partition;
  bool operator==(const TreeLevel&) const = default;
};

// Multi-level ultrametric tree; levels are ordered coarse -> fine.
class ClusterTree {
 public:
  // root_height is the cophenetic value of pairs that never share a
  // cluster. Defaults to the top level height when that level is a single
  // cluster; otherwise it must exceed levels.front().height.
  ClusterTree(std::vector<std::string> leaves, std::vector<TreeLevel> levels,
              std::optional<double> root_height = std::nullopt);

  std::size_t leaf_count() const { return leaves_.size(); }
  std::size_t level_count() const { return levels_.size(); }
  const std::vector<std::string>& leaves() const { return leaves_; }
  const std::vector<TreeLevel>& levels() const { return levels_; }
  const TreeLevel& level(std::size_t i) const { return levels_.at(i); }
  const Partition& bottom() const { return levels_.back().partition; }
  double root_height() const { return root_height_; }
  std::vector<std::size_t> branch_counts() const;

  // u(x,y) = height of the finest level at which x and y share a cluster.
  DistanceMatrix cophenetic() const;

  // Leaf order that keeps every cluster of every level contiguous.
  std::vector<std::size_t> leaf_order() const;

  bool operator==(const ClusterTree&) const = default;

 private:
  std::vector<std::string> leaves_;
  std::vector<TreeLevel> levels_;
  double root_height_;
};

// Per-row rank transform: value -> (rank-1)/(count-1) with average ranks for
// ties; constant rows become 0. Binary and coded matrices pass through
// unchanged.
DataMatrix rank_normalize(const DataMatrix& m);

// Equal-frequency discretization of each row into `bins` categories coded
// 1..bins (ties share a bin). Non-real matrices pass through unchanged.
DataMatrix discretize(const DataMatrix& m, int bins = 8);

DistanceMatrix pairwise_euclidean(const DataMatrix& m, Axis axis);

struct UltrametricCheck {
  bool ultrametric;
  std::size_t violations;
  std::size_t triples;
};

UltrametricCheck is_ultrametric(const DistanceMatrix& d, double tol = 1e-9);

Partition cut_partition(const ClusterTree& tree, std::size_t level_index);

// Adjusted Rand index between two partitions of the same leaf set.
double adjusted_rand_index(const Partition& a, const Partition& b);

}  // namespace dcgkit
