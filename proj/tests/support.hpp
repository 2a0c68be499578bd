#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "dcgkit/core.hpp"
#include "dcgkit/rng.hpp"

namespace testing {

inline std::filesystem::path data_dir() { return DCGKIT_DATA_DIR; }

// Random symmetric distance matrix with entries in [lo, hi).
inline dcgkit::DistanceMatrix random_distance(std::size_t n, std::uint64_t seed, double lo = 0.1, double hi = 10.0) {
  dcgkit::Rng rng(seed);
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d[i][j] = d[j][i] = lo + (hi - lo) * rng.uniform();
  return dcgkit::DistanceMatrix(d);
}

// Euclidean distances of random points in the plane (a metric input).
inline dcgkit::DistanceMatrix random_points(std::size_t n, std::uint64_t seed, double scale = 10.0) {
  dcgkit::Rng rng(seed);
  std::vector<std::pair<double, double>> p(n);
  for (auto& q : p) q = {scale * rng.uniform(), scale * rng.uniform()};
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i][j] = std::hypot(p[i].first - p[j].first, p[i].second - p[j].second);
  return dcgkit::DistanceMatrix(d);
}

inline std::vector<std::string> names(std::size_t n, const std::string& prefix = "x") {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

}  // namespace testing
