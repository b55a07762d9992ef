#include "treebary/tree.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "treebary/error.hpp"
#include "treebary/log.hpp"

namespace treebary {

namespace {

// Sum of edge weights from v up to (not including) ancestor `top`, added
// bottom-up.
double climb_length(const Tree& tree, NodeId v, NodeId top) {
  double total = 0.0;
  while (v != top) {
    total += tree.weight(tree.edge_above(v));
    v = *tree.parent(v);
  }
  return total;
}

}  // namespace

Tree::Tree(NodeId root, std::vector<std::optional<NodeId>> parent,
           std::vector<double> weight_above,
           std::vector<std::vector<double>> embeddings)
    : root_(root), parent_(std::move(parent)) {
  const std::size_t n = parent_.size();
  require(n >= 1, ErrorKind::Structural, "tree must have at least one node");
  require(weight_above.size() == n, ErrorKind::Structural,
          fmt::format("expected {} edge weights, got {}", n, weight_above.size()));
  require(root_.index() < n, ErrorKind::Structural,
          fmt::format("root {} out of range for {} nodes", root_.value, n));
  require(!parent_[root_.index()].has_value(), ErrorKind::Structural,
          "root must not have a parent");

  std::vector<std::size_t> child_count(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (v == root_.index()) {
      continue;
    }
    require(parent_[v].has_value(), ErrorKind::Structural,
            fmt::format("node {} has no parent but is not the root", v));
    const std::size_t p = parent_[v]->index();
    require(p < n, ErrorKind::Structural,
            fmt::format("node {} has out-of-range parent {}", v, p));
    require(p != v, ErrorKind::Structural, fmt::format("node {} is its own parent", v));
    ++child_count[p];
  }

  child_offset_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) {
    child_offset_[v + 1] = child_offset_[v] + child_count[v];
  }
  child_list_.resize(n - 1);
  std::vector<std::size_t> fill(child_offset_.begin(), child_offset_.end() - 1);
  for (std::size_t v = 0; v < n; ++v) {
    if (v != root_.index()) {
      child_list_[fill[parent_[v]->index()]++] = NodeId(v);
    }
  }

  // Iterative DFS; children are visited in increasing id order so subtrees
  // occupy contiguous preorder ranges.
  depth_.assign(n, 0);
  enter_.assign(n, 0);
  exit_.assign(n, 0);
  root_distance_.assign(n, 0.0);
  preorder_.reserve(n);
  std::vector<NodeId> stack{root_};
  depth_[root_.index()] = 1;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    enter_[v.index()] = static_cast<std::uint32_t>(preorder_.size());
    preorder_.push_back(v);
    const auto kids = children(v);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
      depth_[it->index()] = depth_[v.index()] + 1;
      stack.push_back(*it);
    }
  }
  require(preorder_.size() == n, ErrorKind::Structural,
          "parent links contain a cycle or a detached component");

  std::vector<std::uint32_t> size(n, 1);
  for (auto it = preorder_.rbegin(); it != preorder_.rend(); ++it) {
    if (const auto p = parent_[it->index()]) {
      size[p->index()] += size[it->index()];
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    exit_[v] = enter_[v] + size[v];
  }

  edge_weight_.resize(n - 1);
  for (std::size_t v = 0; v < n; ++v) {
    if (v == root_.index()) {
      continue;
    }
    const double w = weight_above[v];
    require(std::isfinite(w) && w >= 0.0, ErrorKind::Structural,
            fmt::format("edge above node {} has invalid weight {}", v, w));
    if (w == 0.0) {
      has_zero_weight_ = true;
    }
    edge_weight_[edge_above(NodeId(v)).index()] = w;
  }
  if (has_zero_weight_) {
    warn("tree has zero-weight edges; its distance is only a pseudo-metric");
  }
  for (const NodeId v : preorder_) {
    if (const auto p = parent_[v.index()]) {
      root_distance_[v.index()] =
          root_distance_[p->index()] + edge_weight_[edge_above(v).index()];
    }
  }

  if (!embeddings.empty()) {
    require(embeddings.size() == n, ErrorKind::Structural,
            fmt::format("expected {} embeddings, got {}", n, embeddings.size()));
    dim_ = embeddings.front().size();
    require(dim_ > 0, ErrorKind::Structural, "embeddings must be non-empty vectors");
    embedding_.reserve(n * dim_);
    for (std::size_t v = 0; v < n; ++v) {
      require(embeddings[v].size() == dim_, ErrorKind::Structural,
              fmt::format("embedding of node {} has dimension {}, expected {}", v,
                          embeddings[v].size(), dim_));
      embedding_.insert(embedding_.end(), embeddings[v].begin(), embeddings[v].end());
    }
  }
}

void Tree::check_node(NodeId v) const {
  require(v.index() < node_count(), ErrorKind::Structural,
          fmt::format("node {} out of range for tree with {} nodes", v.value, node_count()));
}

void Tree::check_edge(EdgeId e) const {
  require(e.index() < edge_count(), ErrorKind::Structural,
          fmt::format("edge {} out of range for tree with {} edges", e.value, edge_count()));
}

std::optional<NodeId> Tree::parent(NodeId v) const {
  check_node(v);
  return parent_[v.index()];
}

std::span<const NodeId> Tree::children(NodeId v) const {
  check_node(v);
  const auto begin = child_offset_[v.index()];
  const auto end = child_offset_[v.index() + 1];
  return std::span<const NodeId>(child_list_).subspan(begin, end - begin);
}

int Tree::depth(NodeId v) const {
  check_node(v);
  return depth_[v.index()];
}

EdgeId Tree::edge_above(NodeId v) const {
  check_node(v);
  require(v != root_, ErrorKind::Structural, "the root has no edge above it");
  return EdgeId(v.value < root_.value ? v.value : v.value - 1);
}

NodeId Tree::lower(EdgeId e) const {
  check_edge(e);
  return NodeId(e.value < root_.value ? e.value : e.value + 1);
}

NodeId Tree::upper(EdgeId e) const {
  return *parent_[lower(e).index()];
}

double Tree::weight(EdgeId e) const {
  check_edge(e);
  return edge_weight_[e.index()];
}

std::span<const double> Tree::embedding(NodeId v) const {
  check_node(v);
  require(has_embeddings(), ErrorKind::Unsupported, "tree has no node embeddings");
  return std::span<const double>(embedding_).subspan(v.index() * dim_, dim_);
}

bool Tree::in_subtree(NodeId z, NodeId v) const {
  check_node(z);
  check_node(v);
  return enter_[v.index()] <= enter_[z.index()] && enter_[z.index()] < exit_[v.index()];
}

std::vector<bool> Tree::subtree_mask(NodeId v) const {
  check_node(v);
  std::vector<bool> mask(node_count(), false);
  for (std::uint32_t pos = enter_[v.index()]; pos < exit_[v.index()]; ++pos) {
    mask[preorder_[pos].index()] = true;
  }
  return mask;
}

NodeId Tree::lca(NodeId a, NodeId b) const {
  check_node(a);
  check_node(b);
  while (depth_[a.index()] > depth_[b.index()]) {
    a = *parent_[a.index()];
  }
  while (depth_[b.index()] > depth_[a.index()]) {
    b = *parent_[b.index()];
  }
  while (a != b) {
    a = *parent_[a.index()];
    b = *parent_[b.index()];
  }
  return a;
}

std::vector<EdgeId> Tree::path(NodeId a, NodeId b) const {
  const NodeId top = lca(a, b);
  std::vector<EdgeId> edges;
  for (NodeId v = a; v != top; v = *parent_[v.index()]) {
    edges.push_back(edge_above(v));
  }
  const auto up_count = edges.size();
  for (NodeId v = b; v != top; v = *parent_[v.index()]) {
    edges.push_back(edge_above(v));
  }
  std::reverse(edges.begin() + static_cast<std::ptrdiff_t>(up_count), edges.end());
  return edges;
}

double Tree::distance(NodeId a, NodeId b) const {
  const NodeId top = lca(a, b);
  // Fixed summation order keeps d(a, b) == d(b, a) bit for bit.
  if (b < a) {
    std::swap(a, b);
  }
  const double first = climb_length(*this, a, top);
  return first + climb_length(*this, b, top);
}

double Tree::root_distance(NodeId v) const {
  check_node(v);
  return root_distance_[v.index()];
}

NodeId Tree::step_toward(NodeId u, NodeId z) const {
  check_node(u);
  check_node(z);
  require(u != z, ErrorKind::Domain, "step_toward needs two distinct nodes");
  if (!in_subtree(z, u)) {
    return *parent_[u.index()];
  }
  // The child of u whose preorder range contains z.
  const auto kids = children(u);
  const auto it = std::upper_bound(
      kids.begin(), kids.end(), enter_[z.index()],
      [this](std::uint32_t pos, NodeId c) { return pos < enter_[c.index()]; });
  return *std::prev(it);
}

bool Tree::adjacent(NodeId a, NodeId b) const {
  check_node(a);
  check_node(b);
  return parent_[a.index()] == b || parent_[b.index()] == a;
}

}  // namespace treebary
