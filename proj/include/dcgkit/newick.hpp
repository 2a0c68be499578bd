#pragma once

#include <string>
#include <string_view>

#include "dcgkit/core.hpp"

namespace dcgkit::newick {

// Quotes a label when it contains Newick metacharacters or whitespace.
std::string quote(const std::string& label);

// Multifurcating Newick: one internal node per cluster per level, leaves at
// height 0, branch length = parent height - child height. When the top
// level has more than one cluster the root is implicit at root_height().
std::string write(const ClusterTree& tree);

// Inverse of write(). All leaves must sit at the same depth; the root is
// read back as a single-cluster top level. With `leaf_order` the leaves are
// returned in that order (it must be a permutation of the parsed labels).
ClusterTree parse(std::string_view text, const std::vector<std::string>& leaf_order = {});

}  // namespace dcgkit::newick
