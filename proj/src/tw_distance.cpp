#include "treebary/tw_distance.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "treebary/error.hpp"

namespace treebary {

EdgeVector::EdgeVector(const Tree& tree, std::vector<double> values)
    : tree_(&tree), values_(std::move(values)) {
  require(values_.size() == tree.edge_count(), ErrorKind::Structural,
          fmt::format("edge vector has {} entries, tree has {} edges", values_.size(),
                      tree.edge_count()));
}

std::vector<double> subtree_masses(const Tree& tree, const DiscreteMeasure& mu) {
  mu.check_on(tree);
  std::vector<double> mass(tree.node_count(), 0.0);
  const auto supports = mu.supports();
  const auto weights = mu.weights();
  for (std::size_t i = 0; i < supports.size(); ++i) {
    mass[supports[i].index()] += weights[i];
  }
  const auto order = tree.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if (const auto p = tree.parent(*it)) {
      mass[p->index()] += mass[it->index()];
    }
  }
  return mass;
}

EdgeVector tree_map(const Tree& tree, const DiscreteMeasure& mu) {
  const auto mass = subtree_masses(tree, mu);
  std::vector<double> values(tree.edge_count());
  for (std::size_t e = 0; e < values.size(); ++e) {
    const EdgeId edge(e);
    values[e] = tree.weight(edge) * mass[tree.lower(edge).index()];
  }
  return EdgeVector(tree, std::move(values));
}

std::vector<double> recover_node_weights(const EdgeVector& vec) {
  const Tree& tree = vec.tree();
  const std::size_t n = tree.node_count();
  // Subtree mass s_v = alpha_e / w_e, filled bottom-up so that zero-weight
  // edges can inherit the mass of their children.
  std::vector<double> below(n, 0.0);
  std::vector<double> children_sum(n, 0.0);
  std::vector<double> children_abs(n, 0.0);
  const auto order = tree.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId v = *it;
    if (v == tree.root()) {
      continue;
    }
    const EdgeId e = tree.edge_above(v);
    const double w = tree.weight(e);
    if (w > 0.0) {
      below[v.index()] = vec[e] / w;
    } else {
      require(vec[e] == 0.0, ErrorKind::Inversion,
              fmt::format("zero-weight edge above node {} carries value {:.17g}", v.value,
                          vec[e]));
      below[v.index()] = children_sum[v.index()];
    }
    const auto p = tree.parent(v)->index();
    children_sum[p] += below[v.index()];
    children_abs[p] += std::abs(below[v.index()]);
  }
  below[tree.root().index()] = 1.0;

  std::vector<double> weights(n);
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t v = 0; v < n; ++v) {
    const double a = below[v] - children_sum[v];
    // Differences at the level of cancellation noise are exact zeros.
    const double noise = 8.0 * eps * (std::abs(below[v]) + children_abs[v]);
    weights[v] = std::abs(a) <= noise ? 0.0 : a;
  }
  return weights;
}

DiscreteMeasure inverse_map(const EdgeVector& vec) {
  auto weights = recover_node_weights(vec);
  std::vector<NodeId> supports;
  std::vector<double> kept;
  for (std::size_t v = 0; v < weights.size(); ++v) {
    const double a = weights[v];
    require(std::isfinite(a), ErrorKind::Numeric,
            fmt::format("non-finite recovered weight at node {}", v));
    require(a >= -kMassTolerance, ErrorKind::NotAMeasure,
            fmt::format("recovered weight {:.17g} at node {} is negative; the vector is not "
                        "the tree mapping of a probability measure",
                        a, v));
    if (a > 0.0) {
      supports.emplace_back(v);
      kept.push_back(a);
    }
  }
  require(!supports.empty(), ErrorKind::NotAMeasure, "recovered measure has no positive mass");
  return DiscreteMeasure(std::move(supports), std::move(kept));
}

double l1_distance(const EdgeVector& a, const EdgeVector& b) {
  require(a.size() == b.size(), ErrorKind::Structural,
          "edge vectors belong to different trees");
  const auto x = a.values();
  const auto y = b.values();
  double total = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) {
    total += std::abs(x[e] - y[e]);
  }
  return total;
}

double tw(const Tree& tree, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return l1_distance(tree_map(tree, mu), tree_map(tree, nu));
}

double tsw(std::span<const Tree> trees, std::span<const MeasurePair> pairs) {
  require(!trees.empty(), ErrorKind::Domain, "tsw needs at least one tree");
  require(trees.size() == pairs.size(), ErrorKind::Domain,
          fmt::format("{} trees but {} measure pairs", trees.size(), pairs.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < trees.size(); ++i) {
    total += tw(trees[i], pairs[i].first, pairs[i].second);
  }
  return total / static_cast<double>(trees.size());
}

}  // namespace treebary
