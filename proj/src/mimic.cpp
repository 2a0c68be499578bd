#include "dcgkit/mimic.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>

#include <fmt/format.h>

#include "dcgkit/parallel.hpp"
#include "dcgkit/rng.hpp"

namespace dcgkit::mimic {

std::size_t BinaryGrid::ones() const { return static_cast<std::size_t>(std::count(v.begin(), v.end(), 1)); }

MarginSpec MarginSpec::of(const BinaryGrid& g) {
  MarginSpec ms{std::vector<std::size_t>(g.rows, 0), std::vector<std::size_t>(g.cols, 0)};
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c)
      if (g(r, c)) {
        ++ms.row_sums[r];
        ++ms.col_sums[c];
      }
  return ms;
}

void MarginSpec::check() const {
  const std::size_t m = row_sums.size(), n = col_sums.size();
  const std::size_t rt = std::accumulate(row_sums.begin(), row_sums.end(), std::size_t{0});
  const std::size_t ct = std::accumulate(col_sums.begin(), col_sums.end(), std::size_t{0});
  if (rt != ct) throw InputError(fmt::format("margins disagree: row sums total {}, column sums total {}", rt, ct));
  for (std::size_t i = 0; i < m; ++i)
    if (row_sums[i] > n) throw InputError(fmt::format("row sum {} of row {} exceeds {} columns", row_sums[i], i, n));
  for (std::size_t j = 0; j < n; ++j)
    if (col_sums[j] > m) throw InputError(fmt::format("column sum {} of column {} exceeds {} rows", col_sums[j], j, m));
  std::vector<std::size_t> r = row_sums;
  std::sort(r.begin(), r.end(), std::greater<>());
  std::size_t lhs = 0;
  for (std::size_t k = 1; k <= m; ++k) {
    lhs += r[k - 1];
    std::size_t rhs = 0;
    for (auto c : col_sums) rhs += std::min(c, k);
    if (lhs > rhs)
      throw InputError(fmt::format(
          "margins infeasible: Gale-Ryser inequality fails at k={} (the {} largest row sums total {} > sum of "
          "min(column sum, {}) = {})",
          k, k, lhs, k, rhs));
  }
}

namespace {

using Cell = std::pair<std::size_t, std::size_t>;

// Checkerboard swaps: two ones at (r1,c1), (r2,c2) with zeros at (r1,c2),
// (r2,c1) (and both allowed by the mask) trade places.
void swap_chain(BinaryGrid& g, const BinaryGrid* mask, std::uint64_t seed, double swap_factor) {
  std::vector<Cell> ones;
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c)
      if (g(r, c)) ones.emplace_back(r, c);
  if (ones.size() < 2) return;
  const auto attempts = static_cast<std::size_t>(swap_factor * static_cast<double>(ones.size()));
  Rng rng(seed);
  for (std::size_t t = 0; t < attempts; ++t) {
    const std::size_t a = rng.below(ones.size()), b = rng.below(ones.size());
    const auto [r1, c1] = ones[a];
    const auto [r2, c2] = ones[b];
    if (r1 == r2 || c1 == c2 || g(r1, c2) || g(r2, c1)) continue;
    if (mask && (!(*mask)(r1, c2) || !(*mask)(r2, c1))) continue;
    g(r1, c1) = 0;
    g(r2, c2) = 0;
    g(r1, c2) = 1;
    g(r2, c1) = 1;
    assert(g(r1, c1) + g(r1, c2) == 1 && g(r2, c1) + g(r2, c2) == 1);
    assert(g(r1, c1) + g(r2, c1) == 1 && g(r1, c2) + g(r2, c2) == 1);
    ones[a] = {r1, c2};
    ones[b] = {r2, c1};
  }
}

// Ryser's construction: rows by decreasing sum take the columns with the
// largest remaining sums.
BinaryGrid greedy_fill(const MarginSpec& ms) {
  const std::size_t m = ms.row_sums.size(), n = ms.col_sums.size();
  BinaryGrid g(m, n);
  std::vector<std::size_t> rows(m), cols(n);
  std::iota(rows.begin(), rows.end(), 0);
  std::stable_sort(rows.begin(), rows.end(), [&](auto a, auto b) { return ms.row_sums[a] > ms.row_sums[b]; });
  std::vector<std::size_t> remaining = ms.col_sums;
  for (auto r : rows) {
    std::iota(cols.begin(), cols.end(), 0);
    std::stable_sort(cols.begin(), cols.end(), [&](auto a, auto b) { return remaining[a] > remaining[b]; });
    for (std::size_t t = 0; t < ms.row_sums[r]; ++t) {
      const auto c = cols[t];
      if (remaining[c] == 0) throw std::logic_error("greedy fill ran out of column capacity");
      g(r, c) = 1;
      --remaining[c];
    }
  }
  return g;
}

// Dinic max flow on source -> rows -> allowed cells -> cols -> sink.
class FlowFill {
 public:
  FlowFill(const BinaryGrid& mask, const MarginSpec& ms) : m_(mask.rows), n_(mask.cols) {
    const std::size_t nodes = m_ + n_ + 2;
    adj_.resize(nodes);
    for (std::size_t r = 0; r < m_; ++r) add(source(), r, ms.row_sums[r]);
    for (std::size_t c = 0; c < n_; ++c) add(m_ + c, sink(), ms.col_sums[c]);
    for (std::size_t r = 0; r < m_; ++r)
      for (std::size_t c = 0; c < n_; ++c)
        if (mask(r, c)) add(r, m_ + c, 1);
  }

  std::size_t run() {
    std::size_t flow = 0;
    while (bfs()) {
      it_.assign(adj_.size(), 0);
      while (std::size_t f = dfs(source(), std::numeric_limits<std::size_t>::max())) flow += f;
    }
    return flow;
  }

  BinaryGrid grid() const {
    BinaryGrid g(m_, n_);
    for (std::size_t r = 0; r < m_; ++r)
      for (auto e : adj_[r]) {
        const Edge& ed = edges_[e];
        if (ed.to >= m_ && ed.to < m_ + n_ && ed.cap == 0 && ed.original == 1) g(r, ed.to - m_) = 1;
      }
    return g;
  }

 private:
  struct Edge {
    std::size_t to;
    std::size_t cap;
    std::size_t original;
  };
  std::size_t source() const { return m_ + n_; }
  std::size_t sink() const { return m_ + n_ + 1; }

  void add(std::size_t a, std::size_t b, std::size_t cap) {
    adj_[a].push_back(edges_.size());
    edges_.push_back({b, cap, cap});
    adj_[b].push_back(edges_.size());
    edges_.push_back({a, 0, 0});
  }

  bool bfs() {
    level_.assign(adj_.size(), -1);
    std::queue<std::size_t> q;
    level_[source()] = 0;
    q.push(source());
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      for (auto e : adj_[u]) {
        if (edges_[e].cap && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[u] + 1;
          q.push(edges_[e].to);
        }
      }
    }
    return level_[sink()] >= 0;
  }

  std::size_t dfs(std::size_t u, std::size_t pushed) {
    if (u == sink()) return pushed;
    for (auto& i = it_[u]; i < adj_[u].size(); ++i) {
      Edge& ed = edges_[adj_[u][i]];
      if (!ed.cap || level_[ed.to] != level_[u] + 1) continue;
      if (std::size_t f = dfs(ed.to, std::min(pushed, ed.cap))) {
        ed.cap -= f;
        edges_[adj_[u][i] ^ 1].cap += f;
        return f;
      }
    }
    return 0;
  }

  std::size_t m_, n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<int> level_;
  std::vector<std::size_t> it_;
};

}  // namespace

BinaryGrid sample_binary(const MarginSpec& ms, std::uint64_t seed, double swap_factor) {
  ms.check();
  BinaryGrid g = greedy_fill(ms);
  swap_chain(g, nullptr, seed, swap_factor);
  return g;
}

BinaryGrid sample_masked(const BinaryGrid& mask, const MarginSpec& ms, std::uint64_t seed,
                         const std::optional<BinaryGrid>& start, double swap_factor) {
  if (ms.row_sums.size() != mask.rows || ms.col_sums.size() != mask.cols)
    throw InputError("margin lengths do not match the mask shape");
  ms.check();
  BinaryGrid g;
  if (start) {
    if (start->rows != mask.rows || start->cols != mask.cols) throw InputError("start grid does not match the mask");
    for (std::size_t i = 0; i < mask.v.size(); ++i)
      if (start->v[i] && !mask.v[i]) throw InputError("start grid has a one outside the mask");
    const auto got = MarginSpec::of(*start);
    if (got.row_sums != ms.row_sums || got.col_sums != ms.col_sums)
      throw InputError("start grid does not have the requested margins");
    g = *start;
  } else {
    FlowFill flow(mask, ms);
    const std::size_t total = std::accumulate(ms.row_sums.begin(), ms.row_sums.end(), std::size_t{0});
    const std::size_t got = flow.run();
    if (got != total)
      throw InputError(fmt::format("margins infeasible inside the mask: at most {} of {} ones can be placed", got,
                                   total));
    g = flow.grid();
  }
  swap_chain(g, &mask, seed, swap_factor);
  return g;
}

std::vector<BinaryLayer> slice_digits(const DataMatrix& m) {
  if (m.kind() == MatrixKind::real) throw InputError("binary slicing needs a binary or coded matrix");
  std::vector<int> codes = m.kind() == MatrixKind::binary ? std::vector<int>{0, 1} : m.codes();
  std::vector<BinaryLayer> out;
  for (int code : codes) {
    BinaryLayer layer{code, BinaryGrid(m.rows(), m.cols())};
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c)
        if (!m.is_gap(r, c) && m.at(r, c) == code) layer.grid(r, c) = 1;
    out.push_back(std::move(layer));
  }
  return out;
}

const char* to_string(Mode mode) { return mode == Mode::fixed ? "fixed" : "resampled"; }

Mode parse_mode(const std::string& name) {
  if (name == "fixed") return Mode::fixed;
  if (name == "resampled") return Mode::resampled;
  throw InputError(fmt::format("unknown mimic mode '{}' (expected fixed or resampled)", name));
}

namespace {

constexpr double kA = 1, kG = 2, kC = 5, kT = 6;

void require_nucleotides(const DataMatrix& b) {
  if (b.kind() != MatrixKind::coded) throw InputError("nucleotide mimicking needs a coded A/G/C/T matrix");
  for (std::size_t r = 0; r < b.rows(); ++r)
    for (std::size_t c = 0; c < b.cols(); ++c) {
      if (b.is_gap(r, c)) continue;
      const double v = b.at(r, c);
      if (v != kA && v != kG && v != kC && v != kT)
        throw InputError(fmt::format("cell ({}, {}) holds code {}, not one of A=1 G=2 C=5 T=6", r, c, v));
    }
}

BinaryGrid indicator(const DataMatrix& b, auto&& pred) {
  BinaryGrid g(b.rows(), b.cols());
  for (std::size_t r = 0; r < b.rows(); ++r)
    for (std::size_t c = 0; c < b.cols(); ++c)
      if (!b.is_gap(r, c) && pred(b.at(r, c))) g(r, c) = 1;
  return g;
}

BinaryGrid observed(const DataMatrix& b) {
  BinaryGrid g(b.rows(), b.cols());
  for (std::size_t r = 0; r < b.rows(); ++r)
    for (std::size_t c = 0; c < b.cols(); ++c) g(r, c) = !b.is_gap(r, c);
  return g;
}

// Fills `set` cells with `one` where marks is 1 and `zero` elsewhere.
void paint(std::vector<double>& values, const BinaryGrid& set, const BinaryGrid& marks, double one, double zero) {
  for (std::size_t i = 0; i < set.v.size(); ++i)
    if (set.v[i]) values[i] = marks.v[i] ? one : zero;
}

}  // namespace

DataMatrix mimic_block_fixed(const DataMatrix& block, std::uint64_t seed, double swap_factor) {
  require_nucleotides(block);
  const BinaryGrid ag = indicator(block, [](double v) { return v == kA || v == kG; });
  const BinaryGrid ct = indicator(block, [](double v) { return v == kC || v == kT; });
  const BinaryGrid g = indicator(block, [](double v) { return v == kG; });
  const BinaryGrid c = indicator(block, [](double v) { return v == kC; });
  const BinaryGrid g2 = sample_masked(ag, MarginSpec::of(g), derive_seed(seed, {0}), g, swap_factor);
  const BinaryGrid c2 = sample_masked(ct, MarginSpec::of(c), derive_seed(seed, {1}), c, swap_factor);
  std::vector<double> values = block.values();
  paint(values, ag, g2, kG, kA);
  paint(values, ct, c2, kC, kT);
  return block.with_values(std::move(values));
}

DataMatrix mimic_block_resampled(const DataMatrix& block, std::uint64_t seed, double swap_factor) {
  require_nucleotides(block);
  const BinaryGrid cells = observed(block);
  const BinaryGrid ct = indicator(block, [](double v) { return v == kC || v == kT; });
  const MarginSpec g_margins = MarginSpec::of(indicator(block, [](double v) { return v == kG; }));
  const MarginSpec c_margins = MarginSpec::of(indicator(block, [](double v) { return v == kC; }));
  // Each failed attempt halves the swap budget of the partition chain, and
  // the last one keeps the observed partition, which is always feasible.
  constexpr int kAttempts = 20;
  for (std::uint64_t attempt = 0; attempt < kAttempts; ++attempt) {
    const std::uint64_t s = derive_seed(seed, {attempt});
    const double factor = attempt + 1 == kAttempts ? 0.0 : std::ldexp(swap_factor, -static_cast<int>(attempt));
    const BinaryGrid ct2 = sample_masked(cells, MarginSpec::of(ct), derive_seed(s, {0}), ct, factor);
    BinaryGrid ag2(block.rows(), block.cols());
    for (std::size_t i = 0; i < ag2.v.size(); ++i) ag2.v[i] = cells.v[i] && !ct2.v[i];
    try {
      const BinaryGrid g2 = sample_masked(ag2, g_margins, derive_seed(s, {1}), std::nullopt, swap_factor);
      const BinaryGrid c2 = sample_masked(ct2, c_margins, derive_seed(s, {2}), std::nullopt, swap_factor);
      std::vector<double> values = block.values();
      paint(values, ag2, g2, kG, kA);
      paint(values, ct2, c2, kC, kT);
      return block.with_values(std::move(values));
    } catch (const InputError&) {
      // inner placement infeasible under this partition; draw another
    }
  }
  throw InputError(fmt::format("resampled mimicking found no feasible letter placement in {} attempts", kAttempts));
}

DataMatrix mimic_block_binary(const DataMatrix& block, std::uint64_t seed, double swap_factor) {
  if (block.kind() != MatrixKind::binary) throw InputError("binary mimicking needs a 0/1 matrix");
  const BinaryGrid ones = indicator(block, [](double v) { return v == 1.0; });
  const BinaryGrid g = sample_masked(observed(block), MarginSpec::of(ones), seed, ones, swap_factor);
  std::vector<double> values = block.values();
  paint(values, observed(block), g, 1.0, 0.0);
  return block.with_values(std::move(values));
}

DataMatrix mimic_block(const DataMatrix& block, Mode mode, std::uint64_t seed, double swap_factor) {
  if (block.kind() == MatrixKind::binary) return mimic_block_binary(block, seed, swap_factor);
  return mode == Mode::fixed ? mimic_block_fixed(block, seed, swap_factor)
                             : mimic_block_resampled(block, seed, swap_factor);
}

namespace {

template <class SeedFn>
DataMatrix mimic_blocks(const DataMatrix& m, const dm::BlockDecomposition& bd, Mode mode, double swap_factor,
                        SeedFn&& seed_of) {
  if (bd.row_partition().size() != m.rows() || bd.col_partition().size() != m.cols())
    throw InputError("block decomposition does not match the matrix");
  std::vector<double> values = m.values();
  for (std::size_t rb = 0; rb < bd.row_blocks(); ++rb) {
    for (std::size_t cb = 0; cb < bd.col_blocks(); ++cb) {
      const auto& rows = bd.block_rows(rb);
      const auto& cols = bd.block_cols(cb);
      const DataMatrix out = mimic_block(m.select(rows, cols), mode, seed_of(rb * bd.col_blocks() + cb), swap_factor);
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) values[rows[i] * m.cols() + cols[j]] = out.at(i, j);
    }
  }
  return m.with_values(std::move(values));
}

}  // namespace

DataMatrix mimic_matrix(const DataMatrix& m, const dm::BlockDecomposition& bd, Mode mode, std::uint64_t seed,
                        double swap_factor) {
  return mimic_blocks(m, bd, mode, swap_factor, [&](std::size_t b) { return derive_seed(seed, {b}); });
}

Ensemble mimic_ensemble(const DataMatrix& m, const dm::BlockDecomposition& bd, std::size_t n_rep,
                        std::uint64_t seed, const EnsembleOptions& opts,
                        const std::optional<dm::BlockDecomposition>& evaluate) {
  if (n_rep < 1) throw InputError("ensemble needs at least one replicate");
  const dm::BlockDecomposition& eval = evaluate ? *evaluate : bd;
  Ensemble out;
  out.energies.label = fmt::format("{}x{}", bd.row_blocks(), bd.col_blocks());
  out.energies.values.assign(n_rep, 0.0);
  const std::size_t keep = std::min(opts.keep_matrices, n_rep);
  std::vector<std::optional<DataMatrix>> kept(keep);
  parallel_for(n_rep, opts.threads, [&](unsigned, std::size_t r) {
    DataMatrix mm =
        mimic_blocks(m, bd, opts.mode, opts.swap_factor, [&](std::size_t b) { return derive_seed(seed, {r, b}); });
    out.energies.values[r] = dm::energy_density(mm, eval, 1);
    if (r < keep) kept[r] = std::move(mm);
  });
  for (auto& k : kept) out.examples.push_back(std::move(*k));
  return out;
}

Partition merge_clusters(const Partition& p, std::size_t groups, const std::vector<std::size_t>& cluster_order) {
  const std::size_t k = p.k();
  if (groups < 1 || groups > k)
    throw InputError(fmt::format("cannot merge {} clusters into {} groups", k, groups));
  std::vector<std::size_t> order = cluster_order;
  if (order.empty()) {
    order.resize(k);
    std::iota(order.begin(), order.end(), 0);
  }
  if (order.size() != k) throw InputError("cluster order must list every cluster once");
  std::vector<int> group_of(k, -1);
  const std::size_t base = k / groups, extra = k % groups;
  std::size_t pos = 0;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t len = base + (g < extra ? 1 : 0);
    for (std::size_t t = 0; t < len; ++t, ++pos) {
      if (order[pos] >= k || group_of[order[pos]] != -1) throw InputError("cluster order must list every cluster once");
      group_of[order[pos]] = static_cast<int>(g);
    }
  }
  std::vector<int> labels(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) labels[i] = group_of[p[i]];
  return Partition(std::move(labels));
}

}  // namespace dcgkit::mimic
