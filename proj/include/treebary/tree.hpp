#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace treebary {

struct NodeId {
  std::uint32_t value = 0;

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint32_t v) : value(v) {}
  constexpr explicit NodeId(std::size_t v) : value(static_cast<std::uint32_t>(v)) {}
  constexpr explicit NodeId(int v) : value(static_cast<std::uint32_t>(v)) {}

  constexpr std::size_t index() const { return value; }
  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

// Edges are identified with their deeper endpoint: every non-root node v owns
// the edge (parent(v), v). Ids are dense in [0, node_count - 1).
struct EdgeId {
  std::uint32_t value = 0;

  constexpr EdgeId() = default;
  constexpr explicit EdgeId(std::uint32_t v) : value(v) {}
  constexpr explicit EdgeId(std::size_t v) : value(static_cast<std::uint32_t>(v)) {}
  constexpr explicit EdgeId(int v) : value(static_cast<std::uint32_t>(v)) {}

  constexpr std::size_t index() const { return value; }
  friend constexpr auto operator<=>(EdgeId, EdgeId) = default;
};

// Rooted tree with non-negative edge lengths and optional node embeddings.
// Immutable after construction, so it can be shared read-only across threads.
class Tree {
public:
  // parent[root] must be empty; weight_above[v] is the length of the edge
  // (parent(v), v) and is ignored for the root. embeddings is either empty
  // or holds node_count rows of equal dimension.
  Tree(NodeId root, std::vector<std::optional<NodeId>> parent,
       std::vector<double> weight_above,
       std::vector<std::vector<double>> embeddings = {});

  std::size_t node_count() const { return parent_.size(); }
  std::size_t edge_count() const { return parent_.size() - 1; }
  NodeId root() const { return root_; }

  std::optional<NodeId> parent(NodeId v) const;
  std::span<const NodeId> children(NodeId v) const;
  int depth(NodeId v) const;
  bool is_leaf(NodeId v) const { return children(v).empty(); }

  EdgeId edge_above(NodeId v) const;
  NodeId lower(EdgeId e) const;  // v_e
  NodeId upper(EdgeId e) const;  // u_e
  double weight(EdgeId e) const;
  std::span<const double> edge_weights() const { return edge_weight_; }
  bool has_zero_weight_edge() const { return has_zero_weight_; }

  // Parents appear before their children; starts at the root.
  std::span<const NodeId> preorder() const { return preorder_; }

  bool has_embeddings() const { return dim_ > 0; }
  std::size_t dim() const { return dim_; }
  std::span<const double> embedding(NodeId v) const;

  // True when z lies in the subtree rooted at v (z == v included).
  bool in_subtree(NodeId z, NodeId v) const;
  std::vector<bool> subtree_mask(NodeId v) const;

  NodeId lca(NodeId a, NodeId b) const;
  // Ordered edge sequence walking from a to b.
  std::vector<EdgeId> path(NodeId a, NodeId b) const;
  double distance(NodeId a, NodeId b) const;
  // Sum of edge weights from the root down to v.
  double root_distance(NodeId v) const;

  // The neighbor of u on the path from u to z (z != u).
  NodeId step_toward(NodeId u, NodeId z) const;
  bool adjacent(NodeId a, NodeId b) const;

  void check_node(NodeId v) const;
  void check_edge(EdgeId e) const;

private:
  NodeId root_;
  std::vector<std::optional<NodeId>> parent_;
  std::vector<double> edge_weight_;  // indexed by EdgeId
  std::vector<int> depth_;
  std::vector<std::size_t> child_offset_;
  std::vector<NodeId> child_list_;
  std::vector<NodeId> preorder_;
  std::vector<std::uint32_t> enter_;
  std::vector<std::uint32_t> exit_;
  std::vector<double> root_distance_;
  std::vector<double> embedding_;
  std::size_t dim_ = 0;
  bool has_zero_weight_ = false;
};

}  // namespace treebary
