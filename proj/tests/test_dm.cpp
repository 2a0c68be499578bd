#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"
#include "dcgkit/dm.hpp"
#include "dcgkit/io.hpp"
#include "support.hpp"

using namespace dcgkit;
using namespace dcgkit::dm;

namespace {

DataMatrix coded(const std::vector<std::vector<double>>& rows) { return DataMatrix::from_rows(rows, MatrixKind::coded); }

// Straight from the definition: per block, TV of each row/column histogram
// to the block histogram, averaged per axis, weighted by the block's share.
double energy_oracle(const DataMatrix& m, const Partition& rp, const Partition& cp) {
  double total_cells = 0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) total_cells += !m.is_gap(r, c);
  double e = 0;
  for (std::size_t rb = 0; rb < rp.k(); ++rb)
    for (std::size_t cb = 0; cb < cp.k(); ++cb) {
      std::map<double, double> block;
      std::map<std::size_t, std::map<double, double>> rows, cols;
      double n = 0;
      for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) {
          if (rp[r] != static_cast<int>(rb) || cp[c] != static_cast<int>(cb) || m.is_gap(r, c)) continue;
          block[m.at(r, c)] += 1;
          rows[r][m.at(r, c)] += 1;
          cols[c][m.at(r, c)] += 1;
          n += 1;
        }
      if (n == 0) continue;
      auto tv = [&](const std::map<double, double>& h) {
        double tot = 0, s = 0;
        for (auto& [k, v] : h) tot += v;
        std::map<double, double> keys = block;
        for (auto& [k, v] : h) keys[k] += 0;
        for (auto& [k, v] : keys) {
          const double p = h.contains(k) ? h.at(k) / tot : 0.0;
          s += std::abs(p - block.at(k) / n);
        }
        return s / 2;
      };
      double hr = 0, hc = 0;
      for (auto& [r, h] : rows) hr += tv(h);
      for (auto& [c, h] : cols) hc += tv(h);
      e += n / total_cells * (hr / rows.size() + hc / cols.size());
    }
  return e;
}

DataMatrix random_coded(std::size_t rows, std::size_t cols, Rng& rng, std::size_t ncodes = 4) {
  const std::vector<double> codes{1, 2, 5, 6};
  std::vector<std::vector<double>> v(rows, std::vector<double>(cols));
  for (auto& row : v)
    for (auto& x : row) x = codes[rng.below(ncodes)];
  return coded(v);
}

Partition random_partition(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<int> a(n);
  for (auto& x : a) x = static_cast<int>(rng.below(k));
  return Partition(a);
}

}  // namespace

TEST_CASE("algorithm names") {
  CHECK(parse_algorithm("hc-average") == Algorithm::hc_average);
  CHECK(parse_algorithm("hc-complete") == Algorithm::hc_complete);
  CHECK(parse_algorithm("dcg") == Algorithm::dcg);
  CHECK_THROWS_AS(parse_algorithm("kmeans"), InputError);
  CouplingConfig cfg;
  cfg.max_iterations = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("extended distance examples") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> v(5, std::vector<double>(4));
    for (auto& row : v)
      for (auto& x : row) x = rng.uniform() * 10;
    const auto m = DataMatrix::from_rows(v, MatrixKind::real);
    const auto plain = pairwise_euclidean(m, Axis::rows);
    const auto ext = extended_distance(m, Partition::singletons(4), Axis::rows);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) CHECK(ext(i, j) == doctest::Approx(std::sqrt(2.0) * plain(i, j)));
  }
  const auto m = DataMatrix::from_rows({{0, 1}, {1, 0}}, MatrixKind::real);
  CHECK(pairwise_euclidean(m, Axis::cols)(0, 1) == doctest::Approx(std::sqrt(2.0)));
  CHECK(extended_distance(m, Partition::single(2), Axis::cols)(0, 1) == doctest::Approx(std::sqrt(2.0)));

  const auto twin = DataMatrix::from_rows({{1, 1, 3}, {2, 2, 0}, {5, 5, 1}}, MatrixKind::real);
  for (const auto& p : {Partition::single(3), Partition::singletons(3), Partition({0, 1, 1})})
    CHECK(extended_distance(twin, p, Axis::cols)(0, 1) == 0.0);
  CHECK_THROWS_AS(extended_distance(twin, Partition::single(2), Axis::cols), InputError);
}

TEST_CASE("level rule") {
  CHECK(default_level_target(12) == 3);
  CHECK(default_level_target(30) == 5);
  CHECK(default_level_target(1) == 1);
  const ClusterTree t(testing::names(4), {{3.0, Partition({0, 0, 1, 1})}, {1.0, Partition({0, 0, 1, 2})},
                                          {0.0, Partition::singletons(4)}},
                      5.0);
  CHECK(pick_level(t, 2).partition.k() == 2);
  CHECK(pick_level(t, 100).partition.k() == 4);
  // 2 and 4 are both one away from 3; 3 exists
  CHECK(pick_level(t, 3).partition.k() == 3);
  const ClusterTree t2(testing::names(4), {{3.0, Partition({0, 0, 1, 1})}, {0.0, Partition::singletons(4)}}, 5.0);
  CHECK(pick_level(t2, 3).partition.k() == 2);
}

TEST_CASE("identical rows and columns couple to single levels") {
  const auto m = coded(std::vector<std::vector<double>>(5, std::vector<double>(4, 2.0)));
  const auto r = couple(m, {}, 1);
  CHECK(r.stable);
  CHECK(r.iterations == 1);
  CHECK(r.row_tree.level_count() == 1);
  CHECK(r.col_tree.level_count() == 1);
  CHECK(r.row_partition.k() == 1);
  CHECK(r.col_partition.k() == 1);
}

TEST_CASE("checkerboard recovers the planted blocks") {
  const auto m = io::read_matrix(testing::data_dir() / "checkerboard.csv");
  std::vector<int> rows(12), cols(10);
  for (int i = 0; i < 12; ++i) rows[i] = i < 7 ? 0 : 1;
  for (int j = 0; j < 10; ++j) cols[j] = j < 4 ? 0 : 1;
  for (auto alg : {Algorithm::hc_average, Algorithm::hc_complete, Algorithm::dcg}) {
    CouplingConfig cfg;
    cfg.row_algorithm = cfg.col_algorithm = alg;
    const auto r = couple(m, cfg, 5);
    CHECK(r.row_partition == Partition(rows));
    CHECK(r.col_partition == Partition(cols));
    CHECK(r.row_tree.bottom() == Partition(rows));
    CHECK(r.col_tree.bottom() == Partition(cols));
    CHECK(r.stable);
    CHECK(energy_density(m, blocks(m, r.row_partition, r.col_partition)) == 0.0);
  }
}

TEST_CASE("couple logs every choice, honours overrides and is deterministic") {
  Rng rng(17);
  const auto m = random_coded(14, 9, rng);
  CouplingConfig cfg;
  cfg.max_iterations = 2;
  cfg.level_override = {2, 0, 5};
  const auto a = couple(m, cfg, 3);
  const auto b = couple(m, cfg, 3);
  CHECK(a.row_tree == b.row_tree);
  CHECK(a.col_tree == b.col_tree);
  REQUIRE(a.log.size() >= 3);
  CHECK(a.log[0].level_axis == Axis::rows);
  CHECK(a.log[0].target_k == 2);
  CHECK(a.log[1].level_axis == Axis::cols);
  CHECK(a.log[1].target_k == 3);
  CHECK(a.log[2].target_k == 5);
  CHECK(a.log.size() == 1 + 2 * static_cast<std::size_t>(a.iterations));

  cfg.row_algorithm = Algorithm::dcg;
  cfg.dcg.trajectories = 20;
  const auto c = couple(m, cfg, 3);
  const auto d = couple(m, cfg, 3);
  CHECK(c.row_tree == d.row_tree);
  CHECK(c.log.size() == d.log.size());
}

TEST_CASE("couple rejects gaps") {
  const auto m = io::matrix_from_csv(",a,b\nr0,1,\nr1,2,5\n");
  CHECK_THROWS_AS(couple(m, {}, 0), InputError);
}

TEST_CASE("blocks tile the matrix") {
  Rng rng(2);
  const auto m = random_coded(6, 5, rng);
  CHECK(blocks(m, Partition::single(6), Partition::single(5)).count() == 1);
  const auto bd = blocks(m, Partition({0, 0, 1, 1, 2, 2}), Partition({0, 1, 1, 2, 2}));
  CHECK(bd.count() == 9);
  std::vector<int> seen(30, 0);
  for (std::size_t rb = 0; rb < 3; ++rb)
    for (std::size_t cb = 0; cb < 3; ++cb) {
      const auto cells = bd.cells(rb, cb);
      CHECK(cells.size() == bd.block_rows(rb).size() * bd.block_cols(cb).size());
      for (auto c : cells) ++seen[c];
    }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
  CHECK(blocks(m, Partition::singletons(6), Partition::singletons(5)).count() == 30);
  CHECK_THROWS_AS(blocks(m, Partition::single(5), Partition::single(5)), InputError);
}

TEST_CASE("energy examples") {
  const auto m = coded({{1, 1}, {6, 6}});
  CHECK(energy_density(m, blocks(m, Partition::single(2), Partition::single(2))) == doctest::Approx(0.5));
  CHECK(energy_density(m, blocks(m, Partition({0, 1}), Partition::single(2))) == 0.0);
  const auto c = coded({{2, 2, 5}, {2, 2, 5}});
  CHECK(energy_density(c, blocks(c, Partition::single(2), Partition({0, 0, 1}))) == 0.0);
  CHECK(energy_density(c, blocks(c, Partition::single(2), Partition::single(3))) > 0.0);
  const auto real = DataMatrix::from_rows({{0.5, 1.5}}, MatrixKind::real);
  CHECK_THROWS_AS(energy_density(real, blocks(real, Partition::single(1), Partition::single(2))), InputError);
}

TEST_CASE("energy agrees with the definition, gaps included") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng.below(9), cols = 1 + rng.below(9);
    auto m = random_coded(rows, cols, rng, 1 + rng.below(4));
    if (trial % 3 == 0) {
      auto gaps = m.gap_mask();
      for (auto& g : gaps) g = rng.below(5) == 0;
      m = DataMatrix(rows, cols, m.values(), gaps, m.row_labels(), m.col_labels(), MatrixKind::coded);
    }
    const auto rp = random_partition(rows, 1 + rng.below(3), rng);
    const auto cp = random_partition(cols, 1 + rng.below(3), rng);
    const double e = energy_density(m, blocks(m, rp, cp), 1 + trial % 3);
    CHECK(e >= 0.0);
    CHECK(e == doctest::Approx(energy_oracle(m, rp, cp)).epsilon(1e-12));
  }
}

TEST_CASE("energy is zero exactly on uniform blocks") {
  Rng rng(5);
  int zeros = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t rows = 2 + rng.below(4), cols = 2 + rng.below(4);
    const auto m = random_coded(rows, cols, rng, 1 + rng.below(2));
    const auto rp = random_partition(rows, 1 + rng.below(2), rng);
    const auto cp = random_partition(cols, 1 + rng.below(2), rng);
    // uniform: every row and column histogram inside a block equals the block's
    bool uniform = energy_oracle(m, rp, cp) < 1e-12;
    const double e = energy_density(m, blocks(m, rp, cp));
    CHECK((e == 0.0) == uniform);
    zeros += uniform;
  }
  CHECK(zeros > 0);
}

TEST_CASE("energy invariant under block-preserving permutations") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 3 + rng.below(6), cols = 3 + rng.below(6);
    const auto m = random_coded(rows, cols, rng);
    const auto rp = random_partition(rows, 2, rng);
    const auto cp = random_partition(cols, 3, rng);
    std::vector<std::size_t> pr(rows), pc(cols);
    std::iota(pr.begin(), pr.end(), 0);
    std::iota(pc.begin(), pc.end(), 0);
    for (std::size_t i = rows; i > 1; --i) std::swap(pr[i - 1], pr[rng.below(i)]);
    for (std::size_t i = cols; i > 1; --i) std::swap(pc[i - 1], pc[rng.below(i)]);
    const auto pm = m.select(pr, pc);
    std::vector<int> rl(rows), cl(cols);
    for (std::size_t i = 0; i < rows; ++i) rl[i] = rp[pr[i]];
    for (std::size_t j = 0; j < cols; ++j) cl[j] = cp[pc[j]];
    CHECK(energy_density(pm, blocks(pm, Partition(rl), Partition(cl))) ==
          doctest::Approx(energy_density(m, blocks(m, rp, cp))).epsilon(1e-12));
  }
}

TEST_CASE("refining down to constant blocks never raises energy") {
  Rng rng(12);
  const Partition true_r({0, 0, 1, 1, 2, 2, 3, 3}), true_c({0, 0, 0, 1, 1, 1, 2, 2, 2});
  const std::vector<double> codes{1, 2, 5, 6};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<double>> block_value(4, std::vector<double>(3));
    for (auto& row : block_value)
      for (auto& x : row) x = codes[rng.below(4)];
    std::vector<std::vector<double>> v(8, std::vector<double>(9));
    for (std::size_t r = 0; r < 8; ++r)
      for (std::size_t c = 0; c < 9; ++c) v[r][c] = block_value[true_r[r]][true_c[c]];
    const auto m = coded(v);
    // any decomposition refining the constant blocks scores 0
    std::vector<int> fr(8), fc(9);
    for (std::size_t r = 0; r < 8; ++r) fr[r] = true_r[r] * 2 + static_cast<int>(rng.below(2));
    for (std::size_t c = 0; c < 9; ++c) fc[c] = true_c[c] * 2 + static_cast<int>(rng.below(2));
    CHECK(energy_density(m, blocks(m, true_r, true_c)) == 0.0);
    CHECK(energy_density(m, blocks(m, Partition(fr), Partition(fc))) == 0.0);
    const auto coarse_r = random_partition(8, 2, rng);
    const auto coarse_c = random_partition(9, 2, rng);
    CHECK(energy_density(m, blocks(m, coarse_r, coarse_c)) >= 0.0);
  }
}

TEST_CASE("a partial refinement can raise energy") {
  // Each row and column of [[1,6],[6,1]] matches the whole-block mix, so one
  // block scores 0; the two 1x2 row blocks have constant, off-mix columns.
  const auto m = coded({{1, 6}, {6, 1}});
  CHECK(energy_density(m, blocks(m, Partition::single(2), Partition::single(2))) == 0.0);
  CHECK(energy_density(m, blocks(m, Partition({0, 1}), Partition::single(2))) == doctest::Approx(0.5));
  CHECK(energy_density(m, blocks(m, Partition({0, 1}), Partition({0, 1}))) == 0.0);
}

TEST_CASE("energy samples statistics") {
  EnergySamples s{"3x3", {1.0, 2.0, 3.0, 4.0}};
  CHECK(s.mean() == 2.5);
  CHECK(s.stddev() == doctest::Approx(std::sqrt(5.0 / 3.0)));
}

TEST_CASE("heatmap export") {
  const auto m = io::read_matrix(testing::data_dir() / "checkerboard.csv");
  const auto r = couple(m, {}, 0);
  const auto h = heatmap(m, r, 0.0);
  CHECK(h.row_order.size() == 12);
  CHECK(h.col_order.size() == 10);
  const auto back = io::matrix_from_csv(h.csv);
  CHECK(back.rows() == 12);
  CHECK(back.cols() == 10);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 10; ++j) CHECK(back.at(i, j) == m.at(h.row_order[i], h.col_order[j]));
  CHECK(h.json.find("\"row_boundaries\"") != std::string::npos);
}
