#include "dcgkit/newick.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <unordered_map>

#include <fmt/format.h>

namespace dcgkit::newick {

std::string quote(const std::string& label) {
  bool plain = !label.empty();
  for (char c : label) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '[' || c == ']' ||
        c == '\'' || c == ':' || c == ';' || c == ',')
      plain = false;
  }
  if (plain) return label;
  std::string out = "'";
  for (char c : label) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

namespace {

// Parent height from a child height and a branch length, as the parser
// computes it.
double add_length(double child_h, long double len) {
  return static_cast<double>(static_cast<long double>(child_h) + len);
}

// Branch length text that the parser turns back into parent_h exactly.
// Shortest double when that works, else a long double with 21 digits.
std::string branch_length(double child_h, double parent_h) {
  const std::string shortest = fmt::format("{}", parent_h - child_h);
  long double back = 0;
  std::from_chars(shortest.data(), shortest.data() + shortest.size(), back);
  if (add_length(child_h, back) == parent_h) return shortest;
  return fmt::format("{:.21}", static_cast<long double>(parent_h) - child_h);
}

}  // namespace

std::string write(const ClusterTree& tree) {
  const auto& levels = tree.levels();
  const std::size_t depth = levels.size();
  std::vector<std::vector<std::vector<std::size_t>>> members(depth);
  for (std::size_t l = 0; l < depth; ++l) members[l] = levels[l].partition.members();

  // Children of cluster c at level l: clusters at l+1 whose first member
  // maps to c (nesting makes this exact).
  std::vector<std::vector<std::vector<std::size_t>>> children(depth);
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    children[l].resize(members[l].size());
    for (std::size_t c = 0; c < members[l + 1].size(); ++c) {
      const auto parent = levels[l].partition[members[l + 1][c].front()];
      children[l][parent].push_back(c);
    }
  }

  std::string out;
  auto emit = [&](auto&& self, std::size_t l, std::size_t c, double parent_h) -> void {
    const double h = levels[l].height;
    out += '(';
    if (l + 1 == depth) {
      bool first = true;
      for (auto leaf : members[l][c]) {
        if (!first) out += ',';
        first = false;
        out += fmt::format("{}:{}", quote(tree.leaves()[leaf]), branch_length(0.0, h));
      }
    } else {
      bool first = true;
      for (auto child : children[l][c]) {
        if (!first) out += ',';
        first = false;
        self(self, l + 1, child, h);
      }
    }
    out += ')';
    if (parent_h >= 0) out += fmt::format(":{}", branch_length(h, parent_h));
  };

  if (levels.front().partition.k() == 1) {
    emit(emit, 0, 0, -1.0);
  } else {
    out += '(';
    for (std::size_t c = 0; c < members[0].size(); ++c) {
      if (c) out += ',';
      emit(emit, 0, c, tree.root_height());
    }
    out += ')';
  }
  return out + ";";
}

namespace {

struct Node {
  std::string label;
  long double length = 0.0;
  bool has_length = false;
  std::vector<std::unique_ptr<Node>> children;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : s_(text) {}

  std::unique_ptr<Node> parse() {
    auto root = node();
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != ';') fail("expected ';'");
    ++pos_;
    skip_ws();
    if (pos_ != s_.size()) fail("trailing characters after ';'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw InputError(fmt::format("newick: {} at offset {}", what, pos_));
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::unique_ptr<Node> node() {
    auto n = std::make_unique<Node>();
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      ++pos_;
      for (;;) {
        n->children.push_back(node());
        skip_ws();
        if (pos_ >= s_.size()) fail("unterminated clade");
        if (s_[pos_] == ',') {
          ++pos_;
          continue;
        }
        if (s_[pos_] == ')') {
          ++pos_;
          break;
        }
        fail("expected ',' or ')'");
      }
    }
    skip_ws();
    n->label = label();
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ':') {
      ++pos_;
      skip_ws();
      const char* begin = s_.data() + pos_;
      const char* end = s_.data() + s_.size();
      auto [ptr, ec] = std::from_chars(begin, end, n->length);
      if (ec != std::errc()) fail("bad branch length");
      pos_ += static_cast<std::size_t>(ptr - begin);
      n->has_length = true;
    }
    return n;
  }

  std::string label() {
    std::string out;
    if (pos_ < s_.size() && s_[pos_] == '\'') {
      ++pos_;
      for (;;) {
        if (pos_ >= s_.size()) fail("unterminated quoted label");
        if (s_[pos_] == '\'') {
          if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '\'') {
            out += '\'';
            pos_ += 2;
            continue;
          }
          ++pos_;
          return out;
        }
        out += s_[pos_++];
      }
    }
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';' ||
          std::isspace(static_cast<unsigned char>(c)))
        break;
      out += c;
      ++pos_;
    }
    return out;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

ClusterTree parse(std::string_view text, const std::vector<std::string>& leaf_order) {
  auto root = Parser(text).parse();
  if (root->children.empty()) throw InputError("newick: tree has no clades");

  // Depth of the leaves; every leaf must share it.
  std::size_t leaf_depth = 0;
  {
    const Node* n = root.get();
    while (!n->children.empty()) {
      n = n->children.front().get();
      ++leaf_depth;
    }
  }
  std::vector<std::string> leaves;
  std::vector<std::vector<int>> labels(leaf_depth);  // labels[d] for depth d clusters
  std::vector<double> heights(leaf_depth, -1.0);
  std::vector<int> counters(leaf_depth, 0);

  // Returns the node height (leaves are at 0).
  auto walk = [&](auto&& self, const Node& n, std::size_t depth, std::vector<int>& path) -> double {
    if (n.children.empty()) {
      if (depth != leaf_depth) throw InputError("newick: leaves are not all at the same depth");
      leaves.push_back(n.label);
      for (std::size_t d = 0; d < leaf_depth; ++d) labels[d].push_back(path[d]);
      return 0.0;
    }
    if (depth >= leaf_depth) throw InputError("newick: leaves are not all at the same depth");
    path[depth] = counters[depth]++;
    double h = -1.0;
    for (const auto& child : n.children) {
      const double ch = self(self, *child, depth + 1, path);
      if (!child->has_length) throw InputError("newick: missing branch length");
      if (h < 0) h = add_length(ch, child->length);
    }
    if (heights[depth] < 0) heights[depth] = h;
    return h;
  };
  std::vector<int> path(leaf_depth, 0);
  walk(walk, *root, 0, path);

  if (!leaf_order.empty()) {
    if (leaf_order.size() != leaves.size()) throw InputError("newick: leaf order size mismatch");
    std::unordered_map<std::string, std::size_t> where;
    for (std::size_t i = 0; i < leaves.size(); ++i) where[leaves[i]] = i;
    std::vector<std::vector<int>> relabeled(leaf_depth, std::vector<int>(leaves.size()));
    for (std::size_t i = 0; i < leaf_order.size(); ++i) {
      auto it = where.find(leaf_order[i]);
      if (it == where.end()) throw InputError(fmt::format("newick: leaf '{}' not found", leaf_order[i]));
      for (std::size_t d = 0; d < leaf_depth; ++d) relabeled[d][i] = labels[d][it->second];
    }
    labels = std::move(relabeled);
    leaves = leaf_order;
  }

  std::vector<TreeLevel> levels;
  for (std::size_t d = 0; d < leaf_depth; ++d) {
    Partition p(labels[d]);
    if (!levels.empty() && levels.back().partition == p) {
      // A unary chain repeats a partition; keep the finer height.
      levels.back().height = heights[d];
      continue;
    }
    levels.push_back({heights[d], std::move(p)});
  }
  return ClusterTree(std::move(leaves), std::move(levels));
}

}  // namespace dcgkit::newick
