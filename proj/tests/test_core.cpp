#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "dcgkit/core.hpp"
#include "support.hpp"

using namespace dcgkit;

namespace {

DataMatrix real_rows(const std::vector<std::vector<double>>& rows) { return DataMatrix::from_rows(rows, MatrixKind::real); }

std::vector<double> row_of(const DataMatrix& m, std::size_t r) { return m.vector_along(Axis::rows, r); }

// Pair-counting ARI written from the contingency definition.
double ari_oracle(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t n = a.size();
  double same_both = 0, same_a = 0, same_b = 0, pairs = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool x = a[i] == a[j], y = b[i] == b[j];
      same_both += x && y;
      same_a += x;
      same_b += y;
      pairs += 1;
    }
  const double expected = same_a * same_b / pairs;
  const double max_index = 0.5 * (same_a + same_b);
  if (max_index == expected) return 1.0;
  return (same_both - expected) / (max_index - expected);
}

}  // namespace

TEST_CASE("rank_normalize maps ranks onto [0,1]") {
  CHECK(row_of(rank_normalize(real_rows({{10, 20, 30}})), 0) == std::vector<double>{0, 0.5, 1});
  CHECK(row_of(rank_normalize(real_rows({{7, 7, 7}})), 0) == std::vector<double>{0, 0, 0});
  // ties take the average rank: ranks 1, 2.5, 2.5, 4
  const auto tied = row_of(rank_normalize(real_rows({{1, 5, 5, 9}})), 0);
  CHECK(tied[1] == doctest::Approx(0.5));
  CHECK(tied[2] == doctest::Approx(0.5));
  CHECK(tied[3] == 1.0);
}

TEST_CASE("rank_normalize passes binary matrices through") {
  const auto m = DataMatrix::from_rows({{0, 1, 1, 0}}, MatrixKind::binary);
  CHECK(rank_normalize(m) == m);
}

TEST_CASE("rank_normalize is idempotent on random matrices") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> rows(4, std::vector<double>(7));
    for (auto& r : rows)
      for (auto& v : r) v = std::floor(rng.uniform() * 5);  // plenty of ties
    const auto once = rank_normalize(real_rows(rows));
    CHECK(rank_normalize(once) == once);
  }
}

TEST_CASE("non-finite cells are rejected with coordinates") {
  CHECK_THROWS_WITH_AS(real_rows({{1, NAN}}), doctest::Contains("row 0, col 1"), InputError);
}

TEST_CASE("data matrix invariants") {
  CHECK_THROWS_AS(DataMatrix::from_rows({{0, 2}}, MatrixKind::binary), InputError);
  CHECK_THROWS_AS(DataMatrix::from_rows({{1, 3}}, MatrixKind::coded), InputError);
  CHECK_THROWS_AS(DataMatrix(1, 2, {1, 2}, {}, {"a"}, {"x", "x"}, MatrixKind::real), InputError);
  CHECK_NOTHROW(DataMatrix::from_rows({{1, 2, 5, 6}}, MatrixKind::coded));
}

TEST_CASE("pairwise_euclidean examples") {
  const auto d = pairwise_euclidean(real_rows({{0, 0}, {3, 4}, {0, 0}}), Axis::rows);
  CHECK(d(0, 1) == 5.0);
  CHECK(d(0, 2) == 0.0);
  CHECK_THROWS_AS(pairwise_euclidean(real_rows({{1, 2}}), Axis::rows), InputError);
}

TEST_CASE("pairwise_euclidean matches a brute-force recomputation") {
  Rng rng(9);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<std::vector<double>> rows(3, std::vector<double>(2));
    for (auto& r : rows)
      for (auto& v : r) v = rng.uniform() * 20 - 10;
    const auto m = real_rows(rows);
    for (Axis axis : {Axis::rows, Axis::cols}) {
      const auto d = pairwise_euclidean(m, axis);
      const std::size_t n = m.extent(axis);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(d(i, i) == 0.0);
        for (std::size_t j = 0; j < n; ++j) {
          double s = 0;
          for (std::size_t t = 0; t < m.extent(axis == Axis::rows ? Axis::cols : Axis::rows); ++t) {
            const double a = axis == Axis::rows ? m.at(i, t) : m.at(t, i);
            const double b = axis == Axis::rows ? m.at(j, t) : m.at(t, j);
            s += (a - b) * (a - b);
          }
          CHECK(d(i, j) == doctest::Approx(std::sqrt(s)).epsilon(1e-12));
          CHECK(d(i, j) == d(j, i));
        }
      }
    }
  }
}

TEST_CASE("distance matrix validation") {
  CHECK_THROWS_AS(DistanceMatrix({{0, 1}, {2, 0}}), InputError);
  CHECK_THROWS_AS(DistanceMatrix({{1, 1}, {1, 0}}), InputError);
  CHECK_THROWS_AS(DistanceMatrix({{0, -1}, {-1, 0}}), InputError);
  CHECK_THROWS_AS(DistanceMatrix({{0, INFINITY}, {INFINITY, 0}}), InputError);
}

TEST_CASE("is_ultrametric examples") {
  const auto flat = DistanceMatrix({{0, 2, 2, 2}, {2, 0, 2, 2}, {2, 2, 0, 2}, {2, 2, 2, 0}});
  CHECK(is_ultrametric(flat, 0).ultrametric);
  CHECK(is_ultrametric(flat, 0).violations == 0);
  CHECK(is_ultrametric(DistanceMatrix({{0, 1, 2}, {1, 0, 2}, {2, 2, 0}}), 0).ultrametric);
  const auto bad = is_ultrametric(DistanceMatrix({{0, 1, 2}, {1, 0, 3}, {2, 3, 0}}), 0);
  CHECK_FALSE(bad.ultrametric);
  CHECK(bad.violations == 1);
  CHECK(bad.triples == 1);
  CHECK_THROWS_AS(is_ultrametric(DistanceMatrix({{0, 1}, {1, 0}})), InputError);
}

TEST_CASE("partition canonical ids and refinement") {
  const Partition p({7, 7, 3, 9, 3});
  CHECK(p.assignment() == std::vector<int>{0, 0, 1, 2, 1});
  CHECK(p.k() == 3);
  CHECK(p.cluster_sizes() == std::vector<std::size_t>{2, 2, 1});
  CHECK(Partition::singletons(5).refines(p));
  CHECK(p.refines(Partition::single(5)));
  CHECK_FALSE(Partition::single(5).refines(p));
}

TEST_CASE("cluster tree invariants are enforced") {
  const auto leaves = testing::names(4);
  const Partition top({0, 0, 1, 1}), bottom({0, 1, 2, 2});
  CHECK_NOTHROW(ClusterTree(leaves, {{2.0, Partition::single(4)}, {1.0, top}, {0.5, bottom}}));
  // heights must decrease
  CHECK_THROWS_AS(ClusterTree(leaves, {{1.0, top}, {1.0, bottom}}, 3.0), InputError);
  // counts must increase
  CHECK_THROWS_AS(ClusterTree(leaves, {{2.0, top}, {1.0, Partition({0, 0, 1, 1})}}, 3.0), InputError);
  // nesting
  CHECK_THROWS_AS(ClusterTree(leaves, {{2.0, top}, {1.0, Partition({0, 1, 1, 2})}}, 3.0), InputError);
  // multi-cluster top needs a root height above it
  CHECK_THROWS_AS(ClusterTree(leaves, {{2.0, top}}), InputError);
  CHECK_THROWS_AS(ClusterTree(leaves, {{2.0, top}}, 2.0), InputError);
}

TEST_CASE("cophenetic distance and cut_partition") {
  const ClusterTree t(testing::names(4), {{2.0, Partition::single(4)}, {1.0, Partition({0, 0, 1, 1})},
                                          {0.5, Partition({0, 1, 2, 2})}});
  const auto u = t.cophenetic();
  CHECK(u(0, 1) == 1.0);
  CHECK(u(2, 3) == 0.5);
  CHECK(u(0, 2) == 2.0);
  CHECK(u(3, 3) == 0.0);
  CHECK(is_ultrametric(u, 0).ultrametric);
  CHECK(cut_partition(t, 0).k() == 1);
  CHECK(cut_partition(t, 2).k() == t.branch_counts().back());
  CHECK(t.branch_counts() == std::vector<std::size_t>{1, 2, 3});
  CHECK_THROWS_AS(cut_partition(t, 3), InputError);

  const ClusterTree open(testing::names(3), {{1.0, Partition({0, 0, 1})}}, 4.0);
  CHECK(open.cophenetic()(0, 2) == 4.0);
}

TEST_CASE("leaf order keeps every cluster contiguous") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    // random nested partitions by repeatedly splitting labels
    std::vector<int> coarse(12), fine(12);
    for (int i = 0; i < 12; ++i) {
      coarse[i] = static_cast<int>(rng.below(3));
      fine[i] = coarse[i] * 10 + static_cast<int>(rng.below(2));
    }
    const Partition c(coarse), f(fine);
    if (c.k() == f.k() || c.k() == 1) continue;
    const ClusterTree t(testing::names(12), {{2.0, c}, {1.0, f}}, 3.0);
    const auto order = t.leaf_order();
    for (const auto& lv : t.levels()) {
      std::map<int, std::pair<std::size_t, std::size_t>> span;  // first, last position
      std::map<int, std::size_t> count;
      for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const int id = lv.partition[order[pos]];
        if (!span.count(id)) span[id] = {pos, pos};
        span[id].second = pos;
        ++count[id];
      }
      for (const auto& [id, s] : span) CHECK(s.second - s.first + 1 == count[id]);
    }
  }
}

TEST_CASE("discretize codes rows into equal-frequency bins") {
  const auto m = discretize(real_rows({{1, 2, 3, 4, 5, 6, 7, 8}}), 4);
  CHECK(m.kind() == MatrixKind::coded);
  CHECK(row_of(m, 0) == std::vector<double>{1, 1, 2, 2, 3, 3, 4, 4});
  const auto constant = discretize(real_rows({{3, 3, 3, 3}}), 4);
  const auto r = row_of(constant, 0);
  CHECK(std::all_of(r.begin(), r.end(), [&](double v) { return v == r[0]; }));
}

TEST_CASE("adjusted rand index agrees with the pair-counting oracle") {
  CHECK(adjusted_rand_index(Partition({0, 0, 1, 1}), Partition({5, 5, 2, 2})) == 1.0);
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> a(15), b(15);
    for (auto& x : a) x = static_cast<int>(rng.below(4));
    for (auto& x : b) x = static_cast<int>(rng.below(3));
    CHECK(adjusted_rand_index(Partition(a), Partition(b)) == doctest::Approx(ari_oracle(a, b)).epsilon(1e-12));
  }
}
