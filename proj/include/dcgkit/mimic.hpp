#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dcgkit/core.hpp"
#include "dcgkit/dm.hpp"

namespace dcgkit::mimic {

struct BinaryGrid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> v;
  BinaryGrid() = default;
  BinaryGrid(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0) {}
  std::uint8_t operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }
  std::uint8_t& operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  std::size_t ones() const;
  bool operator==(const BinaryGrid&) const = default;
};

struct MarginSpec {
  std::vector<std::size_t> row_sums;
  std::vector<std::size_t> col_sums;
  static MarginSpec of(const BinaryGrid& g);
  // Throws InputError naming the failed condition (totals, bounds, or the
  // first violated Gale-Ryser inequality).
  void check() const;
};

// Greedy fill of the margins followed by swap_factor * #ones checkerboard
// swap attempts. Each attempt picks two ones uniformly and independently.
BinaryGrid sample_binary(const MarginSpec& ms, std::uint64_t seed, double swap_factor = 10.0);

// Same, restricted to cells where mask is 1. With `start` the swaps begin
// from that grid (which must fit the mask and margins); otherwise a
// max-flow fill supplies a start and an infeasible request throws.
BinaryGrid sample_masked(const BinaryGrid& mask, const MarginSpec& ms, std::uint64_t seed,
                         const std::optional<BinaryGrid>& start = std::nullopt, double swap_factor = 10.0);

struct BinaryLayer {
  int code;
  BinaryGrid grid;
};

// One indicator layer per code of m's code set (values 0 and 1 for binary
// matrices). Gaps are 0 in every layer.
std::vector<BinaryLayer> slice_digits(const DataMatrix& m);

enum class Mode { fixed, resampled };
const char* to_string(Mode mode);
Mode parse_mode(const std::string& name);

// Blocks over codes A=1 G=2 C=5 T=6; gap cells stay put.
// fixed: the {A,G}/{C,T} cell sets are kept and letters are reshuffled
// inside each set. resampled: the {C,T} cells are redrawn first, then G
// and C are placed inside the new sets.
DataMatrix mimic_block_fixed(const DataMatrix& block, std::uint64_t seed, double swap_factor = 10.0);
DataMatrix mimic_block_resampled(const DataMatrix& block, std::uint64_t seed, double swap_factor = 10.0);

// Binary matrices: ones reshuffled under the block's margins.
DataMatrix mimic_block_binary(const DataMatrix& block, std::uint64_t seed, double swap_factor = 10.0);

DataMatrix mimic_block(const DataMatrix& block, Mode mode, std::uint64_t seed, double swap_factor = 10.0);

// Mimics every block of `bd` independently and reassembles the matrix.
DataMatrix mimic_matrix(const DataMatrix& m, const dm::BlockDecomposition& bd, Mode mode, std::uint64_t seed,
                        double swap_factor = 10.0);

struct EnsembleOptions {
  Mode mode = Mode::fixed;
  double swap_factor = 10.0;
  unsigned threads = 0;
  std::size_t keep_matrices = 0;  // first few mimicked matrices are returned
};

struct Ensemble {
  dm::EnergySamples energies;
  std::vector<DataMatrix> examples;
};

// Replicate r mimics block b with derive_seed(seed, {r, b}). Energies are
// measured against `evaluate`, which defaults to `bd` itself.
Ensemble mimic_ensemble(const DataMatrix& m, const dm::BlockDecomposition& bd, std::size_t n_rep,
                        std::uint64_t seed, const EnsembleOptions& opts = {},
                        const std::optional<dm::BlockDecomposition>& evaluate = std::nullopt);

// Groups clusters 0..k-1 into `groups` contiguous runs (earlier runs take
// the extra members when k does not divide evenly).
Partition merge_clusters(const Partition& p, std::size_t groups, const std::vector<std::size_t>& cluster_order = {});

}  // namespace dcgkit::mimic
