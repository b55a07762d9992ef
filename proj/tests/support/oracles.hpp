#pragma once

// Independent reference implementations used only by tests. None of these
// call into the algorithms they check.

#include <cstdint>
#include <random>
#include <vector>

#include "treebary/measure.hpp"
#include "treebary/tree.hpp"

namespace oracle {

using treebary::DiscreteMeasure;
using treebary::EdgeId;
using treebary::NodeId;
using treebary::Tree;

// Random tree: node v > 0 hangs below a uniformly chosen earlier node, the
// root is node 0 unless `shuffle_root` relabels it.
Tree random_tree(std::mt19937_64& rng, std::size_t nodes, double w_lo = 0.1, double w_hi = 2.0,
                 bool shuffle_root = true);

DiscreteMeasure random_measure(std::mt19937_64& rng, const Tree& tree, std::size_t max_supports);

// Edge path from a to b found by breadth-first search over the undirected tree.
std::vector<EdgeId> bfs_path(const Tree& tree, NodeId a, NodeId b);

// All-pairs distances by Floyd-Warshall on the undirected weighted tree.
std::vector<double> floyd_distances(const Tree& tree);

// Subtree membership by walking parents.
bool below(const Tree& tree, NodeId z, NodeId v);

// Cost matrix between the supports of mu and nu under tree distance.
std::vector<double> tree_cost(const Tree& tree, const DiscreteMeasure& mu,
                              const DiscreteMeasure& nu);

// Frechet function sum_j b_j d(x, z_j)^2 at a node, or at distance t from
// u_e along edge e.
double frechet_at_node(const Tree& tree, const std::vector<double>& dist, NodeId x,
                       const DiscreteMeasure& nu);
double frechet_on_edge(const Tree& tree, const std::vector<double>& dist, EdgeId e, double t,
                       const DiscreteMeasure& nu);
// Distance from the point at t along e to node z.
double point_to_node(const Tree& tree, const std::vector<double>& dist, EdgeId e, double t,
                     NodeId z);

struct FrechetGrid {
  double best_value;
  bool on_node;
  NodeId node;
  EdgeId edge;
  double offset;
};
// Minimum over all nodes and a (steps + 1)-point grid on every edge.
FrechetGrid frechet_grid_min(const Tree& tree, const DiscreteMeasure& nu, int steps);

// Minimum over all partitions of the supports into at most kappa clusters of
// sum over clusters of min over nodes x of sum_j b_j d(x, z_j)^2.
double brute_force_kmeans(const Tree& tree, const DiscreteMeasure& nu, int kappa);

// Random feasible plan: north-west corner rule on randomly permuted rows and
// columns. Returns its cost.
double random_feasible_plan_cost(std::mt19937_64& rng, const std::vector<double>& cost,
                                 const std::vector<double>& mu, const std::vector<double>& nu);

// sum_i p_i |z - a_i|
double median_objective(double z, const std::vector<double>& a, const std::vector<double>& p);

}  // namespace oracle
