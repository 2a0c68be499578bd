#include "dcgkit/dm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>
#include "json.hpp"

#include "dcgkit/hc.hpp"
#include "dcgkit/io.hpp"
#include "dcgkit/newick.hpp"
#include "dcgkit/parallel.hpp"
#include "dcgkit/rng.hpp"

namespace dcgkit::dm {

const char* to_string(Algorithm alg) {
  switch (alg) {
    case Algorithm::hc_average: return "hc-average";
    case Algorithm::hc_complete: return "hc-complete";
    case Algorithm::dcg: return "dcg";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "hc-average" || name == "average" || name == "upgma") return Algorithm::hc_average;
  if (name == "hc-complete" || name == "complete") return Algorithm::hc_complete;
  if (name == "dcg") return Algorithm::dcg;
  throw InputError(fmt::format("unknown clustering algorithm '{}' (expected hc-average, hc-complete or dcg)", name));
}

void CouplingConfig::validate() const {
  if (max_iterations < 1) throw InputError("max iterations must be >= 1");
}

DistanceMatrix extended_distance(const DataMatrix& m, const Partition& counterpart, Axis axis) {
  if (m.has_gaps()) throw InputError("extended distance needs a gap-free matrix");
  const Axis other = axis == Axis::rows ? Axis::cols : Axis::rows;
  if (counterpart.size() != m.extent(other))
    throw InputError(fmt::format("counterpart partition has {} entries but the matrix has {} {}", counterpart.size(),
                                 m.extent(other), to_string(other)));
  const std::size_t n = m.extent(axis);
  if (n < 2) throw InputError(fmt::format("need at least two {} for distances", to_string(axis)));
  const auto sizes = counterpart.cluster_sizes();
  std::vector<std::vector<double>> vecs(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto v = m.vector_along(axis, i);
    std::vector<double> means(counterpart.k(), 0.0);
    for (std::size_t t = 0; t < v.size(); ++t) means[counterpart[t]] += v[t];
    for (std::size_t c = 0; c < means.size(); ++c) means[c] /= static_cast<double>(sizes[c]);
    v.insert(v.end(), means.begin(), means.end());
    vecs[i] = std::move(v);
  }
  std::vector<double> d(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < vecs[i].size(); ++t) {
        const double diff = vecs[i][t] - vecs[j][t];
        s += diff * diff;
      }
      d[i * n + j] = d[j * n + i] = std::sqrt(s);
    }
  }
  return DistanceMatrix(n, std::move(d), axis == Axis::rows ? m.row_labels() : m.col_labels());
}

std::size_t default_level_target(std::size_t axis_length) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(axis_length)))));
}

const TreeLevel& pick_level(const ClusterTree& tree, std::size_t target) {
  const TreeLevel* best = &tree.levels().front();
  auto gap = [&](const TreeLevel& l) {
    const std::size_t k = l.partition.k();
    return k > target ? k - target : target - k;
  };
  // Levels run coarse -> fine, so a strict comparison keeps the coarser tie.
  for (const auto& l : tree.levels())
    if (gap(l) < gap(*best)) best = &l;
  return *best;
}

ClusterTree build_tree(const DistanceMatrix& d, Algorithm alg, const dcg::DcgParams& params) {
  switch (alg) {
    case Algorithm::hc_average: return hc::full_tree(hc::hc_build(d, hc::Linkage::average));
    case Algorithm::hc_complete: return hc::full_tree(hc::hc_build(d, hc::Linkage::complete));
    case Algorithm::dcg: return dcg::dcg_tree(d, params);
  }
  throw InputError("unknown clustering algorithm");
}

namespace {

// Trees for a single row or column cannot be built from distances.
ClusterTree trivial_tree(const std::vector<std::string>& labels) {
  return ClusterTree(labels, {{0.0, Partition::single(labels.size())}});
}

}  // namespace

CouplingResult couple(const DataMatrix& m, const CouplingConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (m.has_gaps()) throw InputError("data mechanics coupling needs a fully observed matrix");
  // One seed per axis, reused across iterations so a repeated partition
  // reproduces the same tree.
  dcg::DcgParams row_params = cfg.dcg, col_params = cfg.dcg;
  row_params.seed = derive_seed(seed, {0});
  col_params.seed = derive_seed(seed, {1});

  auto build = [&](Axis axis, const Partition* counterpart) {
    const auto& labels = axis == Axis::rows ? m.row_labels() : m.col_labels();
    if (labels.size() < 2) return trivial_tree(labels);
    const DistanceMatrix d = counterpart ? extended_distance(m, *counterpart, axis) : pairwise_euclidean(m, axis);
    return axis == Axis::rows ? build_tree(d, cfg.row_algorithm, row_params)
                              : build_tree(d, cfg.col_algorithm, col_params);
  };

  CouplingResult out{build(Axis::rows, nullptr), trivial_tree(m.col_labels()), {}, {}, {}, 0, false};
  std::size_t choice = 0;
  auto choose = [&](const ClusterTree& tree, Axis axis, int iteration) {
    std::size_t target = default_level_target(m.extent(axis));
    if (choice < cfg.level_override.size() && cfg.level_override[choice] > 0) target = cfg.level_override[choice];
    ++choice;
    const Partition& p = pick_level(tree, target).partition;
    out.log.push_back({iteration, axis, target, p});
    return p;
  };

  Partition rp = choose(out.row_tree, Axis::rows, 1);
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    out.iterations = it;
    out.col_tree = build(Axis::cols, &rp);
    out.col_partition = choose(out.col_tree, Axis::cols, it);
    out.row_tree = build(Axis::rows, &out.col_partition);
    // The row level of the rebuilt tree; when it repeats, so does everything
    // downstream of it.
    out.row_partition = choose(out.row_tree, Axis::rows, it + 1);
    if (out.row_partition == rp) {
      out.stable = true;
      break;
    }
    rp = out.row_partition;
  }
  return out;
}

BlockDecomposition::BlockDecomposition(Partition rows, Partition cols)
    : rows_(std::move(rows)), cols_(std::move(cols)), row_members_(rows_.members()), col_members_(cols_.members()) {}

std::vector<std::size_t> BlockDecomposition::cells(std::size_t rb, std::size_t cb) const {
  std::vector<std::size_t> out;
  const std::size_t ncols = cols_.size();
  for (auto r : row_members_.at(rb))
    for (auto c : col_members_.at(cb)) out.push_back(r * ncols + c);
  return out;
}

BlockDecomposition blocks(const DataMatrix& m, const Partition& rp, const Partition& cp) {
  if (rp.size() != m.rows() || cp.size() != m.cols())
    throw InputError(fmt::format("block partitions cover {}x{} but the matrix is {}x{}", rp.size(), cp.size(),
                                 m.rows(), m.cols()));
  return BlockDecomposition(rp, cp);
}

double energy_density(const DataMatrix& m, const BlockDecomposition& bd, unsigned threads) {
  if (m.kind() == MatrixKind::real) throw InputError("energy density needs a categorical matrix; discretize first");
  if (bd.row_partition().size() != m.rows() || bd.col_partition().size() != m.cols())
    throw InputError("block decomposition does not match the matrix");
  // Category index per cell, -1 for gaps.
  std::map<double, int> cat_of;
  for (std::size_t i = 0; i < m.values().size(); ++i)
    if (!m.gap_mask()[i]) cat_of.emplace(m.values()[i], 0);
  int next = 0;
  for (auto& [v, c] : cat_of) c = next++;
  const std::size_t ncat = cat_of.size();
  std::vector<int> cat(m.values().size(), -1);
  for (std::size_t i = 0; i < cat.size(); ++i)
    if (!m.gap_mask()[i]) cat[i] = cat_of.at(m.values()[i]);
  const std::size_t observed = static_cast<std::size_t>(std::count_if(cat.begin(), cat.end(), [](int c) { return c >= 0; }));
  if (observed == 0) return 0.0;

  std::vector<double> terms(bd.count(), 0.0);
  parallel_for(bd.count(), threads, [&](unsigned, std::size_t b) {
    const auto& rows = bd.block_rows(b / bd.col_blocks());
    const auto& cols = bd.block_cols(b % bd.col_blocks());
    std::vector<double> block(ncat, 0.0);
    std::vector<std::vector<double>> per_row(rows.size(), std::vector<double>(ncat, 0.0));
    std::vector<std::vector<double>> per_col(cols.size(), std::vector<double>(ncat, 0.0));
    double cells = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (std::size_t j = 0; j < cols.size(); ++j) {
        const int c = cat[rows[i] * m.cols() + cols[j]];
        if (c < 0) continue;
        block[c] += 1.0;
        per_row[i][c] += 1.0;
        per_col[j][c] += 1.0;
        cells += 1.0;
      }
    }
    if (cells == 0.0) return;
    for (auto& x : block) x /= cells;
    auto mean_tv = [&](std::vector<std::vector<double>>& dists) {
      double sum = 0.0;
      std::size_t used = 0;
      for (auto& d : dists) {
        const double total = std::accumulate(d.begin(), d.end(), 0.0);
        if (total == 0.0) continue;
        double tv = 0.0;
        for (std::size_t c = 0; c < ncat; ++c) tv += std::abs(d[c] / total - block[c]);
        sum += 0.5 * tv;
        ++used;
      }
      return used ? sum / static_cast<double>(used) : 0.0;
    };
    terms[b] = cells / static_cast<double>(observed) * (mean_tv(per_row) + mean_tv(per_col));
  });
  // Summed in block order so the result does not depend on scheduling.
  return std::accumulate(terms.begin(), terms.end(), 0.0);
}

double EnergySamples::mean() const {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double EnergySamples::stddev() const {
  if (values.size() < 2) return 0.0;
  const double mu = mean();
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

namespace {

// Start offsets of each run of equal cluster ids along an order.
std::vector<std::size_t> boundaries(const Partition& p, const std::vector<std::size_t>& order) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < order.size(); ++i)
    if (i == 0 || p[order[i]] != p[order[i - 1]]) out.push_back(i);
  return out;
}

}  // namespace

Heatmap heatmap(const DataMatrix& m, const CouplingResult& cr, double energy) {
  Heatmap h;
  h.row_order = cr.row_tree.leaf_order();
  h.col_order = cr.col_tree.leaf_order();
  h.csv = io::matrix_to_csv(m.select(h.row_order, h.col_order));

  nlohmann::ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  auto labels = [](const std::vector<std::string>& all, const std::vector<std::size_t>& order) {
    std::vector<std::string> out;
    for (auto i : order) out.push_back(all[i]);
    return out;
  };
  j["row_order"] = labels(m.row_labels(), h.row_order);
  j["col_order"] = labels(m.col_labels(), h.col_order);
  j["row_tree"] = newick::write(cr.row_tree);
  j["col_tree"] = newick::write(cr.col_tree);
  j["row_assignment"] = cr.row_partition.assignment();
  j["col_assignment"] = cr.col_partition.assignment();
  j["row_boundaries"] = boundaries(cr.row_partition, h.row_order);
  j["col_boundaries"] = boundaries(cr.col_partition, h.col_order);
  j["blocks"] = fmt::format("{}x{}", cr.row_partition.k(), cr.col_partition.k());
  j["energy"] = energy;
  j["iterations"] = cr.iterations;
  j["stable"] = cr.stable;
  nlohmann::ordered_json log = nlohmann::ordered_json::array();
  for (const auto& s : cr.log)
    log.push_back({{"iteration", s.iteration},
                   {"axis", to_string(s.level_axis)},
                   {"target_k", s.target_k},
                   {"k", s.partition.k()},
                   {"assignment", s.partition.assignment()}});
  j["log"] = std::move(log);
  h.json = j.dump(2) + "\n";
  return h;
}

}  // namespace dcgkit::dm
