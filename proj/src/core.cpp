#include "dcgkit/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "dcgkit/parallel.hpp"

namespace dcgkit {

unsigned resolve_threads(unsigned requested) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DCGKIT_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

const char* to_string(MatrixKind kind) {
  switch (kind) {
    case MatrixKind::binary: return "binary";
    case MatrixKind::coded: return "coded";
    case MatrixKind::real: return "real";
  }
  return "?";
}

const char* to_string(Axis axis) { return axis == Axis::rows ? "rows" : "cols"; }

namespace {

void check_unique(const std::vector<std::string>& labels, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) throw InputError(fmt::format("duplicate {} label '{}'", what, l));
  }
}

std::vector<std::string> numbered(const char* prefix, std::size_t n) {
  std::vector<std::string> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = fmt::format("{}{}", prefix, i);
  return out;
}

}  // namespace

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                       std::vector<std::uint8_t> gaps, std::vector<std::string> row_labels,
                       std::vector<std::string> col_labels, MatrixKind kind,
                       std::vector<int> codes)
    : rows_(rows),
      cols_(cols),
      values_(std::move(values)),
      gaps_(std::move(gaps)),
      row_labels_(std::move(row_labels)),
      col_labels_(std::move(col_labels)),
      kind_(kind),
      codes_(std::move(codes)) {
  if (rows_ == 0 || cols_ == 0) throw InputError("matrix must have at least one row and column");
  if (gaps_.empty()) gaps_.assign(rows_ * cols_, 0);
  if (values_.size() != rows_ * cols_ || gaps_.size() != rows_ * cols_)
    throw InputError("matrix cell count does not match its dimensions");
  if (row_labels_.empty()) row_labels_ = numbered("r", rows_);
  if (col_labels_.empty()) col_labels_ = numbered("c", cols_);
  if (row_labels_.size() != rows_ || col_labels_.size() != cols_)
    throw InputError("label count does not match matrix dimensions");
  check_unique(row_labels_, "row");
  check_unique(col_labels_, "column");

  const std::set<int> code_set(codes_.begin(), codes_.end());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      if (is_gap(r, c)) {
        values_[r * cols_ + c] = 0.0;
        continue;
      }
      const double v = at(r, c);
      if (!std::isfinite(v)) throw InputError(fmt::format("non-finite cell at row {}, col {}", r, c));
      if (kind_ == MatrixKind::binary && v != 0.0 && v != 1.0)
        throw InputError(fmt::format("binary matrix has value {} at row {}, col {}", v, r, c));
      if (kind_ == MatrixKind::coded) {
        if (v != std::round(v) || !code_set.contains(static_cast<int>(v)))
          throw InputError(fmt::format("code {} at row {}, col {} is not in the code set", v, r, c));
      }
    }
  }
}

DataMatrix DataMatrix::from_rows(const std::vector<std::vector<double>>& rows, MatrixKind kind,
                                 std::vector<int> codes) {
  if (rows.empty()) throw InputError("matrix must have at least one row");
  const std::size_t cols = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * cols);
  for (const auto& row : rows) {
    if (row.size() != cols) throw InputError("ragged matrix rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return DataMatrix(rows.size(), cols, std::move(values), {}, {}, {}, kind, std::move(codes));
}

bool DataMatrix::has_gaps() const {
  return std::any_of(gaps_.begin(), gaps_.end(), [](std::uint8_t g) { return g != 0; });
}

std::vector<double> DataMatrix::vector_along(Axis axis, std::size_t i) const {
  std::vector<double> out;
  if (axis == Axis::rows) {
    out.assign(values_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
               values_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  } else {
    out.resize(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, i);
  }
  return out;
}

DataMatrix DataMatrix::transposed() const {
  std::vector<double> v(values_.size());
  std::vector<std::uint8_t> g(gaps_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) {
      v[c * rows_ + r] = values_[r * cols_ + c];
      g[c * rows_ + r] = gaps_[r * cols_ + c];
    }
  }
  return DataMatrix(cols_, rows_, std::move(v), std::move(g), col_labels_, row_labels_, kind_, codes_);
}

DataMatrix DataMatrix::select(std::span<const std::size_t> row_idx,
                              std::span<const std::size_t> col_idx) const {
  std::vector<double> v;
  std::vector<std::uint8_t> g;
  v.reserve(row_idx.size() * col_idx.size());
  g.reserve(row_idx.size() * col_idx.size());
  std::vector<std::string> rl, cl;
  for (auto r : row_idx) rl.push_back(row_labels_.at(r));
  for (auto c : col_idx) cl.push_back(col_labels_.at(c));
  for (auto r : row_idx) {
    for (auto c : col_idx) {
      v.push_back(at(r, c));
      g.push_back(gaps_[r * cols_ + c]);
    }
  }
  return DataMatrix(row_idx.size(), col_idx.size(), std::move(v), std::move(g), std::move(rl),
                    std::move(cl), kind_, codes_);
}

DataMatrix DataMatrix::with_values(std::vector<double> values) const {
  return DataMatrix(rows_, cols_, std::move(values), gaps_, row_labels_, col_labels_, kind_, codes_);
}

DistanceMatrix::DistanceMatrix(std::size_t n, std::vector<double> d, std::vector<std::string> labels)
    : n_(n), d_(std::move(d)), labels_(std::move(labels)) {
  if (n_ == 0) throw InputError("distance matrix is empty");
  if (d_.size() != n_ * n_) throw InputError("distance matrix is not square");
  if (labels_.empty()) labels_ = numbered("x", n_);
  if (labels_.size() != n_) throw InputError("distance label count mismatch");
  check_unique(labels_, "distance");
  for (std::size_t i = 0; i < n_; ++i) {
    if (d_[i * n_ + i] != 0.0) throw InputError(fmt::format("nonzero diagonal at {}", i));
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double a = d_[i * n_ + j];
      const double b = d_[j * n_ + i];
      if (!std::isfinite(a) || !std::isfinite(b) || a < 0.0 || b < 0.0)
        throw InputError(fmt::format("distance ({}, {}) is negative or not finite", i, j));
      if (std::abs(a - b) > 1e-9 * std::max(1.0, std::max(a, b)))
        throw InputError(fmt::format("distance matrix is not symmetric at ({}, {})", i, j));
      if (a != b) {
        const double mid = 0.5 * (a + b);
        d_[i * n_ + j] = mid;
        d_[j * n_ + i] = mid;
      }
    }
  }
}

DistanceMatrix::DistanceMatrix(const std::vector<std::vector<double>>& d)
    : DistanceMatrix(d.size(),
                     [&] {
                       std::vector<double> flat;
                       for (const auto& row : d) {
                         if (row.size() != d.size()) throw InputError("distance matrix is not square");
                         flat.insert(flat.end(), row.begin(), row.end());
                       }
                       return flat;
                     }(),
                     {}) {}

double DistanceMatrix::max() const { return *std::max_element(d_.begin(), d_.end()); }

double DistanceMatrix::median_offdiag() const {
  std::vector<double> v;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) v.push_back(d_[i * n_ + j]);
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

DistanceMatrix DistanceMatrix::scaled(double factor) const {
  std::vector<double> d = d_;
  for (auto& x : d) x *= factor;
  return DistanceMatrix(n_, std::move(d), labels_);
}

Partition::Partition(std::vector<int> labels) : assignment_(std::move(labels)) {
  std::map<int, int> remap;
  for (auto& a : assignment_) {
    auto [it, inserted] = remap.try_emplace(a, static_cast<int>(remap.size()));
    a = it->second;
  }
  k_ = remap.size();
}

Partition Partition::singletons(std::size_t n) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), 0);
  return Partition(std::move(v));
}

std::vector<std::vector<std::size_t>> Partition::members() const {
  std::vector<std::vector<std::size_t>> out(k_);
  for (std::size_t i = 0; i < assignment_.size(); ++i) out[assignment_[i]].push_back(i);
  return out;
}

std::vector<std::size_t> Partition::cluster_sizes() const {
  std::vector<std::size_t> out(k_, 0);
  for (int a : assignment_) ++out[a];
  return out;
}

bool Partition::refines(const Partition& coarser) const {
  if (coarser.size() != size()) return false;
  std::vector<int> parent(k_, -1);
  for (std::size_t i = 0; i < size(); ++i) {
    int& p = parent[assignment_[i]];
    if (p == -1) p = coarser[i];
    else if (p != coarser[i]) return false;
  }
  return true;
}

ClusterTree::ClusterTree(std::vector<std::string> leaves, std::vector<TreeLevel> levels,
                         std::optional<double> root_height)
    : leaves_(std::move(leaves)), levels_(std::move(levels)) {
  if (levels_.empty()) throw InputError("cluster tree needs at least one level");
  const std::size_t n = leaves_.size();
  if (n == 0) throw InputError("cluster tree has no leaves");
  check_unique(leaves_, "leaf");
  for (std::size_t l = 0; l < levels_.size(); ++l) {
    const auto& lv = levels_[l];
    if (lv.partition.size() != n) throw InputError("tree level partition size mismatch");
    if (!std::isfinite(lv.height) || lv.height < 0.0) throw InputError("tree level height must be finite and >= 0");
    if (l > 0) {
      const auto& up = levels_[l - 1];
      if (!(lv.height < up.height)) throw InputError("tree heights must strictly decrease coarse to fine");
      if (!(lv.partition.k() > up.partition.k()))
        throw InputError("tree branch counts must strictly increase coarse to fine");
      if (!lv.partition.refines(up.partition)) throw InputError("tree levels are not nested");
    }
  }
  if (root_height) {
    if (!(*root_height >= levels_.front().height) ||
        (levels_.front().partition.k() > 1 && !(*root_height > levels_.front().height)))
      throw InputError("root height must exceed the top level height");
    root_height_ = *root_height;
  } else {
    if (levels_.front().partition.k() != 1)
      throw InputError("tree without a single-cluster top level needs an explicit root height");
    root_height_ = levels_.front().height;
  }
}

std::vector<std::size_t> ClusterTree::branch_counts() const {
  std::vector<std::size_t> out;
  for (const auto& lv : levels_) out.push_back(lv.partition.k());
  return out;
}

DistanceMatrix ClusterTree::cophenetic() const {
  const std::size_t n = leaves_.size();
  std::vector<double> d(n * n, root_height_);
  // Walk fine -> coarse; the first level that joins a pair fixes its value.
  std::vector<std::uint8_t> done(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    d[i * n + i] = 0.0;
    done[i * n + i] = 1;
  }
  for (auto lv = levels_.rbegin(); lv != levels_.rend(); ++lv) {
    for (const auto& members : lv->partition.members()) {
      for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
          const std::size_t i = members[a], j = members[b];
          if (done[i * n + j]) continue;
          done[i * n + j] = done[j * n + i] = 1;
          d[i * n + j] = d[j * n + i] = lv->height;
        }
      }
    }
  }
  return DistanceMatrix(n, std::move(d), leaves_);
}

std::vector<std::size_t> ClusterTree::leaf_order() const {
  std::vector<std::size_t> order(leaves_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (const auto& lv : levels_) {
      if (lv.partition[a] != lv.partition[b]) return lv.partition[a] < lv.partition[b];
    }
    return false;
  });
  return order;
}

namespace {

// Average ranks (1-based) of v.
std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) rank[idx[t]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

DataMatrix rank_normalize(const DataMatrix& m) {
  if (m.kind() != MatrixKind::real) return m;
  std::vector<double> out(m.values().size(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::vector<double> vals;
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (m.is_gap(r, c)) continue;
      vals.push_back(m.at(r, c));
      cols.push_back(c);
    }
    if (vals.size() < 2) continue;
    if (std::all_of(vals.begin(), vals.end(), [&](double v) { return v == vals.front(); })) continue;
    const auto ranks = average_ranks(vals);
    const double denom = static_cast<double>(vals.size() - 1);
    for (std::size_t t = 0; t < vals.size(); ++t) out[r * m.cols() + cols[t]] = (ranks[t] - 1.0) / denom;
  }
  return m.with_values(std::move(out));
}

DataMatrix discretize(const DataMatrix& m, int bins) {
  if (m.kind() != MatrixKind::real) return m;
  if (bins < 1) throw InputError("bin count must be positive");
  std::vector<double> out(m.values().size(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::vector<double> vals;
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (m.is_gap(r, c)) continue;
      vals.push_back(m.at(r, c));
      cols.push_back(c);
    }
    if (vals.empty()) continue;
    const auto ranks = average_ranks(vals);
    const double count = static_cast<double>(vals.size());
    for (std::size_t t = 0; t < vals.size(); ++t) {
      int b = static_cast<int>(std::floor((ranks[t] - 1.0) * bins / count));
      out[r * m.cols() + cols[t]] = std::clamp(b, 0, bins - 1) + 1;
    }
  }
  std::vector<int> codes(bins);
  std::iota(codes.begin(), codes.end(), 1);
  return DataMatrix(m.rows(), m.cols(), std::move(out), m.gap_mask(), m.row_labels(),
                    m.col_labels(), MatrixKind::coded, std::move(codes));
}

DistanceMatrix pairwise_euclidean(const DataMatrix& m, Axis axis) {
  if (m.has_gaps()) throw InputError("Euclidean distances need a gap-free matrix");
  const std::size_t n = m.extent(axis);
  if (n < 2) throw InputError(fmt::format("need at least two {} for distances", to_string(axis)));
  std::vector<std::vector<double>> vecs(n);
  for (std::size_t i = 0; i < n; ++i) vecs[i] = m.vector_along(axis, i);
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

UltrametricCheck is_ultrametric(const DistanceMatrix& d, double tol) {
  if (tol < 0.0) throw InputError("ultrametric tolerance must be >= 0");
  const std::size_t n = d.size();
  if (n < 3) throw InputError("ultrametric check needs at least three points");
  std::size_t violations = 0, triples = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        double a = d(i, j), b = d(i, k), c = d(j, k);
        // two largest must agree
        if (a < b) std::swap(a, b);
        if (b < c) std::swap(b, c);
        if (a < b) std::swap(a, b);
        ++triples;
        if (a - b > tol) ++violations;
      }
    }
  }
  return {violations == 0, violations, triples};
}

Partition cut_partition(const ClusterTree& tree, std::size_t level_index) {
  if (level_index >= tree.level_count())
    throw InputError(fmt::format("level index {} out of range (tree has {} levels)", level_index,
                                 tree.level_count()));
  return tree.level(level_index).partition;
}

double adjusted_rand_index(const Partition& a, const Partition& b) {
  if (a.size() != b.size()) throw InputError("ARI needs partitions of the same leaf set");
  const std::size_t n = a.size();
  std::vector<std::vector<double>> table(a.k(), std::vector<double>(b.k(), 0.0));
  for (std::size_t i = 0; i < n; ++i) table[a[i]][b[i]] += 1.0;
  auto c2 = [](double x) { return x * (x - 1.0) / 2.0; };
  double sum_ij = 0.0;
  std::vector<double> ra(a.k(), 0.0), cb(b.k(), 0.0);
  for (std::size_t i = 0; i < a.k(); ++i) {
    for (std::size_t j = 0; j < b.k(); ++j) {
      sum_ij += c2(table[i][j]);
      ra[i] += table[i][j];
      cb[j] += table[i][j];
    }
  }
  double sa = 0.0, sb = 0.0;
  for (double x : ra) sa += c2(x);
  for (double x : cb) sb += c2(x);
  const double total = c2(static_cast<double>(n));
  const double expected = total > 0 ? sa * sb / total : 0.0;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (sum_ij - expected) / (max_index - expected);
}

}  // namespace dcgkit
