#include "dcgkit/dcg.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "dcgkit/hc.hpp"
#include "dcgkit/parallel.hpp"
#include "dcgkit/rng.hpp"

namespace dcgkit::dcg {

Temperature::Temperature(double value) : value_(value) {
  if (!std::isfinite(value) || value <= 0.0)
    throw InputError(fmt::format("temperature must be finite and > 0 (got {})", value));
}

void WalkParams::validate() const {
  if (visit_threshold < 1) throw InputError("visit threshold must be >= 1");
  if (!(spike_factor > 0.0) || !std::isfinite(spike_factor)) throw InputError("spike factor must be > 0");
  if (max_steps < 1) throw InputError("max steps must be >= 1");
}

WalkError::WalkError(std::vector<Removal> removed, std::size_t steps)
    : std::runtime_error(fmt::format("random walk exceeded {} steps after {} removals", steps, removed.size())),
      partial(std::move(removed)) {}

SimilarityMatrix similarity(const DistanceMatrix& d, Temperature t) {
  SimilarityMatrix s;
  s.n = d.size();
  s.temperature = t;
  s.v.resize(s.n * s.n);
  for (std::size_t i = 0; i < s.v.size(); ++i) s.v[i] = std::exp(-d.data()[i] / t.value());
  return s;
}

TransitionMatrix transition(const SimilarityMatrix& s) {
  TransitionMatrix p;
  p.n = s.n;
  p.v.resize(s.v.size());
  for (std::size_t i = 0; i < s.n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < s.n; ++j) sum += s(i, j);
    for (std::size_t j = 0; j < s.n; ++j) p.v[i * s.n + j] = s(i, j) / sum;
  }
  return p;
}

namespace {

double median_of(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 ? static_cast<double>(v[h]) : 0.5 * static_cast<double>(v[h - 1] + v[h]);
}

}  // namespace

Partition clusters_from_recurrence(std::size_t n, const std::vector<Removal>& series, const WalkParams& params) {
  std::vector<int> label(n, 0);
  if (series.empty()) return Partition(std::move(label));
  // A fresh region of two or more nodes needs at least 2*threshold + 1 steps
  // before its first removal, so shorter gaps are never spikes.
  const double floor = 2.0 * params.visit_threshold;
  std::vector<std::size_t> gaps;
  int cluster = 0;
  label[series.front().node] = 0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const std::size_t gap = series[i].step - series[i - 1].step;
    double limit = floor;
    if (gaps.size() >= 3) limit = std::max(limit, params.spike_factor * median_of(gaps));
    if (static_cast<double>(gap) > limit) ++cluster;
    label[series[i].node] = cluster;
    gaps.push_back(gap);
  }
  return Partition(std::move(label));
}

WalkResult walk_partition(const TransitionMatrix& p, const WalkParams& params, std::uint64_t seed) {
  params.validate();
  const std::size_t n = p.n;
  if (n == 0) throw InputError("walk needs at least one node");
  if (n == 1) return {Partition::single(1), {}};

  Rng rng(seed);
  std::vector<std::uint8_t> alive(n, 1);
  std::vector<int> visits(n, 0);
  std::vector<std::size_t> alive_list(n);
  for (std::size_t i = 0; i < n; ++i) alive_list[i] = i;
  std::vector<Removal> removed;
  removed.reserve(n);

  std::size_t step = 0;
  std::size_t cur = rng.below(n);
  auto arrive = [&](std::size_t node) {
    cur = node;
    if (alive[cur] && ++visits[cur] > params.visit_threshold) {
      alive[cur] = 0;
      alive_list.erase(std::find(alive_list.begin(), alive_list.end(), cur));
      removed.push_back({step, cur});
    }
  };
  arrive(cur);

  while (!alive_list.empty()) {
    if (++step > params.max_steps) throw WalkError(std::move(removed), params.max_steps);
    const double* row = &p.v[cur * n];
    double mass = 0.0;
    for (auto j : alive_list)
      if (j != cur) mass += row[j];
    if (mass < 1e-12) {
      arrive(alive_list[rng.below(alive_list.size())]);
      continue;
    }
    const double u = rng.uniform() * mass;
    double acc = 0.0;
    std::size_t next = n;
    for (auto j : alive_list) {
      if (j == cur || row[j] <= 0.0) continue;
      acc += row[j];
      next = j;
      if (u < acc) break;
    }
    arrive(next);
  }
  return {clusters_from_recurrence(n, removed, params), std::move(removed)};
}

SharingMatrix sharing_ensemble(const DistanceMatrix& d, Temperature t, std::size_t trajectories,
                               const WalkParams& params, std::uint64_t seed, unsigned threads) {
  if (trajectories < 1) throw InputError("ensemble needs at least one trajectory");
  params.validate();
  const std::size_t n = d.size();
  const TransitionMatrix p = transition(similarity(d, t));

  const unsigned workers = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(trajectories));
  std::vector<std::vector<std::uint32_t>> counts(workers, std::vector<std::uint32_t>(n * n, 0));
  std::vector<std::uint8_t> ok(trajectories, 0);

  parallel_for(trajectories, workers, [&](unsigned w, std::size_t traj) {
    std::optional<Partition> part;
    for (std::uint64_t attempt = 0; attempt < 2 && !part; ++attempt) {
      try {
        part = walk_partition(p, params, derive_seed(seed, {traj, attempt})).partition;
      } catch (const WalkError&) {
      }
    }
    if (!part) return;
    ok[traj] = 1;
    auto& local = counts[w];
    for (const auto& members : part->members())
      for (auto i : members)
        for (auto j : members) ++local[i * n + j];
  });

  SharingMatrix q;
  q.n = n;
  q.trajectories = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
  q.failed = trajectories - q.trajectories;
  if (q.trajectories == 0) throw std::runtime_error("every trajectory of the ensemble failed");
  q.v.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n * n; ++i) {
    std::uint64_t total = 0;
    for (const auto& c : counts) total += c[i];
    q.v[i] = static_cast<double>(total) / static_cast<double>(q.trajectories);
  }
  for (std::size_t i = 0; i < n; ++i) q.v[i * n + i] = 1.0;
  return q;
}

std::vector<double> symmetric_eigenvalues(const SquareGrid& input, double tol) {
  const std::size_t n = input.n;
  std::vector<double> a = input.v;
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

  double norm = 0.0;
  for (double x : a) norm += x * x;
  const double limit = tol * std::max(1.0, std::sqrt(norm));

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) off += at(i, j) * at(i, j);
    if (std::sqrt(off) <= limit) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (std::abs(theta) > 1e150) t = 0.5 / std::abs(theta);
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = at(k, p), akq = at(k, q);
          at(k, p) = at(p, k) = c * akp - s * akq;
          at(k, q) = at(q, k) = s * akp + c * akq;
        }
        at(p, p) -= t * apq;
        at(q, q) += t * apq;
        at(p, q) = at(q, p) = 0.0;
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = at(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

std::size_t eigen_cluster_count(const SquareGrid& q, double rel_tol) {
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw InputError("eigenvalue tolerance must lie in (0, 1)");
  for (std::size_t i = 0; i < q.n; ++i)
    for (std::size_t j = i + 1; j < q.n; ++j)
      if (std::abs(q(i, j) - q(j, i)) > 1e-9)
        throw InputError(fmt::format("sharing matrix is not symmetric at ({}, {})", i, j));
  const auto eig = symmetric_eigenvalues(q);
  if (eig.empty() || eig.front() <= 0.0) return 0;
  const double cut = rel_tol * eig.front();
  return static_cast<std::size_t>(std::count_if(eig.begin(), eig.end(), [&](double l) { return l > cut; }));
}

DistanceMatrix sharing_distance(const SharingMatrix& q, const std::vector<std::string>& labels) {
  std::vector<double> d(q.v.size());
  for (std::size_t i = 0; i < q.n; ++i)
    for (std::size_t j = 0; j < q.n; ++j) d[i * q.n + j] = i == j ? 0.0 : std::max(0.0, 1.0 - q(i, j));
  return DistanceMatrix(q.n, std::move(d), labels);
}

Partition composition(const SquareGrid& q, std::size_t n_clusters) {
  if (n_clusters < 1 || n_clusters > q.n)
    throw InputError(fmt::format("cluster count {} outside [1, {}]", n_clusters, q.n));
  if (n_clusters == q.n) return Partition::singletons(q.n);
  if (n_clusters == 1) return Partition::single(q.n);
  std::vector<double> d(q.v.size());
  for (std::size_t i = 0; i < q.n; ++i)
    for (std::size_t j = 0; j < q.n; ++j) {
      const double x = i == j ? 0.0 : std::max(0.0, 1.0 - 0.5 * (q(i, j) + q(j, i)));
      d[i * q.n + j] = x;
    }
  const auto dg = hc::hc_build(DistanceMatrix(q.n, std::move(d), {}), hc::Linkage::complete);
  return dg.cut(n_clusters);
}

std::vector<Temperature> log_grid(double lo, double hi, std::size_t points) {
  if (points < 2) throw InputError("temperature grid needs at least two points");
  if (!(lo > 0.0) || !(hi > lo) || !std::isfinite(hi))
    throw InputError(fmt::format("bad temperature range {}:{}", lo, hi));
  std::vector<Temperature> grid;
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = i + 1 == points ? hi : std::exp(a + (b - a) * static_cast<double>(i) / (points - 1));
    grid.emplace_back(i == 0 ? lo : x);
  }
  return grid;
}

std::vector<Temperature> default_grid(const DistanceMatrix& d, std::size_t points) {
  const double dmax = d.max();
  if (dmax <= 0.0) return log_grid(0.1, 10.0, points);
  double med = d.median_offdiag();
  if (med <= 0.0) med = dmax / 100.0;
  return log_grid(med / 10.0, 10.0 * dmax, points);
}

TemperatureProfile profile(const DistanceMatrix& d, const DcgParams& params) {
  TemperatureProfile prof;
  prof.grid = params.grid.empty() ? default_grid(d) : params.grid;
  if (prof.grid.size() < 3) throw InputError("temperature grid needs at least three points");
  for (std::size_t i = 1; i < prof.grid.size(); ++i)
    if (!(prof.grid[i - 1] < prof.grid[i])) throw InputError("temperature grid must be strictly increasing");
  for (std::size_t g = 0; g < prof.grid.size(); ++g) {
    auto q = sharing_ensemble(d, prof.grid[g], params.trajectories, params.walk, derive_seed(params.seed, {g}),
                              params.threads);
    prof.counts.push_back(eigen_cluster_count(q, params.eigen_rel_tol));
    prof.sharing.push_back(std::move(q));
  }
  return prof;
}

std::vector<std::size_t> select_temperatures(const TemperatureProfile& prof, std::size_t min_run) {
  if (min_run < 1) throw InputError("min run must be >= 1");
  std::map<std::size_t, std::size_t> by_count;  // count -> middle index of the largest-T run
  const auto& c = prof.counts;
  for (std::size_t start = 0; start < c.size();) {
    std::size_t end = start;
    while (end + 1 < c.size() && c[end + 1] == c[start]) ++end;
    const std::size_t len = end - start + 1;
    if (len >= min_run && c[start] > 1) by_count[c[start]] = start + (len - 1) / 2;
    start = end + 1;
  }
  std::vector<std::size_t> out;
  for (const auto& [count, idx] : by_count) out.push_back(idx);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

ClusterTree synthesize_tree(const std::vector<std::string>& leaves, const std::vector<double>& heights,
                            const std::vector<Partition>& compositions, double root_height) {
  const std::size_t levels = compositions.size();
  if (levels != heights.size()) throw InputError("one height per composition is required");
  if (levels == 0) return ClusterTree(leaves, {{root_height, Partition::single(leaves.size())}});

  std::vector<Partition> adjusted = compositions;
  for (std::size_t l = levels - 1; l-- > 0;) {
    const Partition& fine = adjusted[l + 1];
    const Partition& coarse = compositions[l];
    std::vector<int> target(fine.k());
    for (std::size_t f = 0; f < fine.k(); ++f) {
      std::vector<std::size_t> votes(coarse.k(), 0);
      for (std::size_t i = 0; i < fine.size(); ++i)
        if (fine[i] == static_cast<int>(f)) ++votes[coarse[i]];
      // max_element returns the first maximum, i.e. the lowest coarse id
      target[f] = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    }
    std::vector<int> labels(fine.size());
    for (std::size_t i = 0; i < fine.size(); ++i) labels[i] = target[fine[i]];
    adjusted[l] = Partition(std::move(labels));
  }

  std::vector<TreeLevel> kept;
  for (std::size_t l = levels; l-- > 0;) {
    if (!kept.empty() && adjusted[l].k() >= kept.back().partition.k()) continue;
    kept.push_back({heights[l], adjusted[l]});
  }
  std::reverse(kept.begin(), kept.end());
  if (kept.front().partition.k() > 1) kept.insert(kept.begin(), {root_height, Partition::single(leaves.size())});
  return ClusterTree(leaves, std::move(kept));
}

DcgResult run(const DistanceMatrix& d, const DcgParams& params) {
  TemperatureProfile prof = profile(d, params);
  prof.selected = select_temperatures(prof, params.min_run);
  std::vector<double> heights;
  for (auto idx : prof.selected) {
    prof.compositions.push_back(composition(prof.sharing[idx], prof.counts[idx]));
    heights.push_back(prof.grid[idx].value());
  }
  const double root = prof.grid.back().value();
  ClusterTree tree = synthesize_tree(d.labels(), heights, prof.compositions, root);
  const bool empty = prof.selected.empty();
  return {std::move(tree), std::move(prof), empty};
}

ClusterTree dcg_tree(const DistanceMatrix& d, const DcgParams& params) { return run(d, params).tree; }

}  // namespace dcgkit::dcg
