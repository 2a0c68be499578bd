#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dcgkit/core.hpp"

namespace dcgkit::hc {

enum class Linkage { single, complete, average };

const char* to_string(Linkage link);
Linkage parse_linkage(const std::string& name);

// Node ids follow the usual convention: leaves are 0..n-1 and the node
// created by merge i is n+i.
struct Merge {
  std::size_t left;
  std::size_t right;
  double height;
  std::size_t size;
  bool operator==(const Merge&) const = default;
};

struct Dendrogram {
  std::vector<Merge> merges;
  std::vector<std::string> labels;

  std::size_t leaf_count() const { return labels.size(); }
  // Partition after the first n-k merges, i.e. exactly k clusters.
  Partition cut(std::size_t k) const;
};

Dendrogram hc_build(const DistanceMatrix& d, Linkage link);

// Raised when a requested cluster count falls inside a run of tied merge
// heights and so has no level of its own.
class UnreachableLevel : public InputError {
 public:
  UnreachableLevel(std::size_t requested, std::size_t nearest);
  std::size_t requested;
  std::size_t nearest;
};

// Cuts the dendrogram at each requested cluster count. Level heights are the
// height of the last merge performed before the cut (0 for singletons).
ClusterTree dendrogram_to_tree(const Dendrogram& dg, const std::vector<std::size_t>& k_list);

// One level per distinct merge height (plus the singleton level when no
// merge happens at height 0). Used wherever a full HC tree is needed.
ClusterTree full_tree(const Dendrogram& dg);

// Cluster counts with a level of their own.
std::vector<std::size_t> reachable_counts(const Dendrogram& dg);

std::string to_newick(const Dendrogram& dg);

}  // namespace dcgkit::hc
