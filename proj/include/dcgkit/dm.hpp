#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dcgkit/core.hpp"
#include "dcgkit/dcg.hpp"

namespace dcgkit::dm {

enum class Algorithm { hc_average, hc_complete, dcg };
const char* to_string(Algorithm alg);
Algorithm parse_algorithm(const std::string& name);

struct CouplingConfig {
  int max_iterations = 3;
  Algorithm row_algorithm = Algorithm::hc_average;
  Algorithm col_algorithm = Algorithm::hc_average;
  // Requested cluster counts for successive level choices (row level of
  // iteration 1, column level of iteration 1, row level of iteration 2, ...).
  // 0 or a missing entry falls back to round(sqrt(axis length)).
  std::vector<std::size_t> level_override;
  dcg::DcgParams dcg;  // used when an axis runs dcg; seed is derived per axis
  void validate() const;
};

struct CouplingStep {
  int iteration;
  Axis level_axis;  // axis whose tree level was chosen
  std::size_t target_k;
  Partition partition;
};

struct CouplingResult {
  ClusterTree row_tree;
  ClusterTree col_tree;
  Partition row_partition;  // last chosen levels, which frame the blocks
  Partition col_partition;
  std::vector<CouplingStep> log;
  int iterations = 0;
  bool stable = false;
};

// Appends to each vector along `axis` the means of its entries over each
// cluster of `counterpart` (a partition of the opposite axis), then takes
// Euclidean distances.
DistanceMatrix extended_distance(const DataMatrix& m, const Partition& counterpart, Axis axis);

// Level of `tree` whose cluster count is closest to target (ties: coarser).
const TreeLevel& pick_level(const ClusterTree& tree, std::size_t target);
std::size_t default_level_target(std::size_t axis_length);

ClusterTree build_tree(const DistanceMatrix& d, Algorithm alg, const dcg::DcgParams& params);

CouplingResult couple(const DataMatrix& m, const CouplingConfig& cfg, std::uint64_t seed);

class BlockDecomposition {
 public:
  BlockDecomposition(Partition rows, Partition cols);
  const Partition& row_partition() const { return rows_; }
  const Partition& col_partition() const { return cols_; }
  std::size_t row_blocks() const { return rows_.k(); }
  std::size_t col_blocks() const { return cols_.k(); }
  std::size_t count() const { return rows_.k() * cols_.k(); }
  const std::vector<std::size_t>& block_rows(std::size_t rb) const { return row_members_[rb]; }
  const std::vector<std::size_t>& block_cols(std::size_t cb) const { return col_members_[cb]; }
  // Row-major cell indices (r * cols + c) of block (rb, cb).
  std::vector<std::size_t> cells(std::size_t rb, std::size_t cb) const;

 private:
  Partition rows_, cols_;
  std::vector<std::vector<std::size_t>> row_members_, col_members_;
};

BlockDecomposition blocks(const DataMatrix& m, const Partition& rp, const Partition& cp);

// Sum over blocks of (cells_b / cells) * H(b), with H(b) the mean total
// variation distance of the block's rows to the block distribution plus the
// same for its columns. Gap cells are left out of every count.
double energy_density(const DataMatrix& m, const BlockDecomposition& bd, unsigned threads = 0);

struct EnergySamples {
  std::string label;
  std::vector<double> values;
  double mean() const;
  double stddev() const;  // sample standard deviation
};

// Heatmap export: the matrix permuted by both trees, and a JSON sidecar with
// the orders, trees and block boundaries.
struct Heatmap {
  std::vector<std::size_t> row_order;
  std::vector<std::size_t> col_order;
  std::string csv;
  std::string json;
};
Heatmap heatmap(const DataMatrix& m, const CouplingResult& cr, double energy);

}  // namespace dcgkit::dm
