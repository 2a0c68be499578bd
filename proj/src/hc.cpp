#include "dcgkit/hc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <fmt/format.h>

#include "dcgkit/newick.hpp"

namespace dcgkit::hc {

const char* to_string(Linkage link) {
  switch (link) {
    case Linkage::single: return "single";
    case Linkage::complete: return "complete";
    case Linkage::average: return "average";
  }
  return "?";
}

Linkage parse_linkage(const std::string& name) {
  if (name == "single") return Linkage::single;
  if (name == "complete") return Linkage::complete;
  if (name == "average" || name == "upgma") return Linkage::average;
  throw InputError(fmt::format("unknown linkage '{}'", name));
}

Dendrogram hc_build(const DistanceMatrix& d, Linkage link) {
  const std::size_t n = d.size();
  if (n < 2) throw InputError("hierarchical clustering needs at least two leaves");

  std::vector<double> dist = d.data();
  std::vector<std::size_t> node(n), size(n, 1);
  std::vector<bool> active(n, true);
  for (std::size_t i = 0; i < n; ++i) node[i] = i;

  Dendrogram dg;
  dg.labels = d.labels();
  dg.merges.reserve(n - 1);

  for (std::size_t step = 0; step + 1 < n; ++step) {
    // Smallest distance; ties resolved by the lexicographically smallest
    // (i, j) slot pair because the scan is ordered and the test is strict.
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (!active[j]) continue;
        if (dist[i * n + j] < best) {
          best = dist[i * n + j];
          bi = i;
          bj = j;
        }
      }
    }

    // Lance-Williams update into slot bi.
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == bi || k == bj) continue;
      const double dik = dist[bi * n + k];
      const double djk = dist[bj * n + k];
      double v = 0.0;
      switch (link) {
        case Linkage::single: v = std::min(dik, djk); break;
        case Linkage::complete: v = std::max(dik, djk); break;
        case Linkage::average:
          v = (static_cast<double>(size[bi]) * dik + static_cast<double>(size[bj]) * djk) /
              static_cast<double>(size[bi] + size[bj]);
          break;
      }
      dist[bi * n + k] = dist[k * n + bi] = v;
    }

    dg.merges.push_back({node[bi], node[bj], best, size[bi] + size[bj]});
    node[bi] = n + step;
    size[bi] += size[bj];
    active[bj] = false;
  }
  return dg;
}

Partition Dendrogram::cut(std::size_t k) const {
  const std::size_t n = leaf_count();
  if (k < 1 || k > n) throw InputError(fmt::format("cannot cut {} leaves into {} clusters", n, k));
  // Union-find over the first n-k merges.
  std::vector<std::size_t> parent(2 * n - 1);
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t t = 0; t < n - k; ++t) {
    parent[find(merges[t].left)] = n + t;
    parent[find(merges[t].right)] = n + t;
  }
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(find(i));
  return Partition(std::move(labels));
}

namespace {

double level_height(const Dendrogram& dg, std::size_t k) {
  const std::size_t n = dg.leaf_count();
  return k == n ? 0.0 : dg.merges[n - k - 1].height;
}

bool is_reachable(const Dendrogram& dg, std::size_t k) {
  const std::size_t n = dg.leaf_count();
  if (k == 1) return true;
  return dg.merges[n - k].height > level_height(dg, k);
}

}  // namespace

UnreachableLevel::UnreachableLevel(std::size_t req, std::size_t near)
    : InputError(fmt::format("{} clusters is not reachable (tied merge heights); nearest achievable is {}",
                             req, near)),
      requested(req),
      nearest(near) {}

std::vector<std::size_t> reachable_counts(const Dendrogram& dg) {
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k <= dg.leaf_count(); ++k)
    if (is_reachable(dg, k)) out.push_back(k);
  return out;
}

ClusterTree dendrogram_to_tree(const Dendrogram& dg, const std::vector<std::size_t>& k_list) {
  const std::size_t n = dg.leaf_count();
  if (k_list.empty()) throw InputError("k_list is empty");
  for (std::size_t i = 0; i < k_list.size(); ++i) {
    if (k_list[i] < 1 || k_list[i] > n)
      throw InputError(fmt::format("cluster count {} outside [1, {}]", k_list[i], n));
    if (i > 0 && k_list[i] <= k_list[i - 1]) throw InputError("k_list must be strictly increasing");
  }
  const auto reachable = reachable_counts(dg);
  std::vector<TreeLevel> levels;
  for (auto k : k_list) {
    if (!is_reachable(dg, k)) {
      std::size_t nearest = reachable.front();
      for (auto r : reachable) {
        const auto gap = [&](std::size_t x) { return x > k ? x - k : k - x; };
        if (gap(r) < gap(nearest)) nearest = r;
      }
      throw UnreachableLevel(k, nearest);
    }
    levels.push_back({level_height(dg, k), dg.cut(k)});
  }
  std::optional<double> root;
  if (k_list.front() != 1) root = dg.merges.back().height;
  return ClusterTree(dg.labels, std::move(levels), root);
}

ClusterTree full_tree(const Dendrogram& dg) {
  if (dg.leaf_count() == 1) return ClusterTree(dg.labels, {{0.0, Partition::single(1)}});
  return dendrogram_to_tree(dg, reachable_counts(dg));
}

std::string to_newick(const Dendrogram& dg) {
  const std::size_t n = dg.leaf_count();
  std::function<std::string(std::size_t, double)> emit = [&](std::size_t id, double parent_h) {
    if (id < n) return fmt::format("{}:{}", newick::quote(dg.labels[id]), parent_h);
    const Merge& m = dg.merges[id - n];
    return fmt::format("({},{}):{}", emit(m.left, m.height), emit(m.right, m.height), parent_h - m.height);
  };
  if (n == 1) return newick::quote(dg.labels[0]) + ";";
  const Merge& root = dg.merges.back();
  return fmt::format("({},{});", emit(root.left, root.height), emit(root.right, root.height));
}

}  // namespace dcgkit::hc
