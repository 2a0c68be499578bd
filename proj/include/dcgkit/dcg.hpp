#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "dcgkit/core.hpp"
#include "dcgkit/parallel.hpp"

namespace dcgkit::dcg {

// Scale parameter turning distances into similarities; finite and > 0.
class Temperature {
 public:
  explicit Temperature(double value);
  double value() const { return value_; }
  auto operator<=>(const Temperature&) const = default;

 private:
  double value_;
};

// Row-major n x n grid shared by the matrix types below.
struct SquareGrid {
  std::size_t n = 0;
  std::vector<double> v;
  double operator()(std::size_t i, std::size_t j) const { return v[i * n + j]; }
};

// s_ij = exp(-d_ij / T).
struct SimilarityMatrix : SquareGrid {
  Temperature temperature{1.0};
};

// Row-stochastic kernel.
struct TransitionMatrix : SquareGrid {};

struct WalkParams {
  int visit_threshold = 5;
  double spike_factor = 5.0;
  std::size_t max_steps = 10'000'000;
  void validate() const;
};

struct Removal {
  std::size_t step;
  std::size_t node;
  bool operator==(const Removal&) const = default;
};

struct WalkResult {
  Partition partition;
  std::vector<Removal> recurrence;
};

// Thrown when a walk exceeds max_steps; carries the removals made so far.
class WalkError : public std::runtime_error {
 public:
  WalkError(std::vector<Removal> partial, std::size_t steps);
  std::vector<Removal> partial;
};

// Ensemble cluster-sharing probabilities.
struct SharingMatrix : SquareGrid {
  std::size_t trajectories = 0;  // trajectories that contributed
  std::size_t failed = 0;        // trajectories dropped after a retry
};

struct TemperatureProfile {
  std::vector<Temperature> grid;
  std::vector<std::size_t> counts;
  std::vector<SharingMatrix> sharing;     // one per grid point
  std::vector<std::size_t> selected;      // grid indices, decreasing T
  std::vector<Partition> compositions;    // one per selected index
};

struct DcgParams {
  std::vector<Temperature> grid;  // empty: default_grid(D)
  std::size_t trajectories = 100;
  WalkParams walk;
  double eigen_rel_tol = 0.05;
  std::size_t min_run = 3;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: DCGKIT_THREADS or hardware concurrency
};

struct DcgResult {
  ClusterTree tree;
  TemperatureProfile profile;
  bool empty_selection = false;
};

SimilarityMatrix similarity(const DistanceMatrix& d, Temperature t);
TransitionMatrix transition(const SimilarityMatrix& s);

// One regulated random walk. The walk follows the off-diagonal part of P
// restricted to nodes not yet removed; a node is removed once its visit
// count exceeds the threshold. Gaps between successive removals form the
// recurrence series and spikes in it separate clusters.
WalkResult walk_partition(const TransitionMatrix& p, const WalkParams& params, std::uint64_t seed);

// Spike labelling of a recurrence series (exposed for testing).
Partition clusters_from_recurrence(std::size_t n, const std::vector<Removal>& series, const WalkParams& params);

SharingMatrix sharing_ensemble(const DistanceMatrix& d, Temperature t, std::size_t trajectories,
                               const WalkParams& params, std::uint64_t seed, unsigned threads = 0);

// Eigenvalues of a symmetric matrix, descending, by cyclic Jacobi sweeps
// until the off-diagonal Frobenius norm drops below tol * max(1, ||A||_F).
std::vector<double> symmetric_eigenvalues(const SquareGrid& a, double tol = 1e-10);

std::size_t eigen_cluster_count(const SquareGrid& q, double rel_tol = 0.05);

// Complete-linkage cut of 1 - q into n_clusters clusters.
Partition composition(const SquareGrid& q, std::size_t n_clusters);

// 1 - q as a distance matrix, for ultrametric diagnostics and export.
DistanceMatrix sharing_distance(const SharingMatrix& q, const std::vector<std::string>& labels);

// 30 log-spaced points from median(d)/10 to 10*max(d).
std::vector<Temperature> default_grid(const DistanceMatrix& d, std::size_t points = 30);
std::vector<Temperature> log_grid(double lo, double hi, std::size_t points);

TemperatureProfile profile(const DistanceMatrix& d, const DcgParams& params);

// Grid indices of the middle points of constant runs (length >= min_run,
// count > 1), largest temperature first; repeated counts keep the run at
// the larger temperature.
std::vector<std::size_t> select_temperatures(const TemperatureProfile& prof, std::size_t min_run = 3);

DcgResult run(const DistanceMatrix& d, const DcgParams& params);
ClusterTree dcg_tree(const DistanceMatrix& d, const DcgParams& params);

// Builds the nested tree from compositions ordered coarse -> fine. Each
// finer cluster moves wholesale into the coarser cluster holding the
// plurality of its members; levels that stop adding branches are dropped.
// A single-cluster root level at root_height is added on top.
ClusterTree synthesize_tree(const std::vector<std::string>& leaves, const std::vector<double>& heights,
                            const std::vector<Partition>& compositions, double root_height);

using dcgkit::resolve_threads;

}  // namespace dcgkit::dcg
