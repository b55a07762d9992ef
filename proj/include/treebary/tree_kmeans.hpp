#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "treebary/barycenter.hpp"
#include "treebary/measure.hpp"
#include "treebary/tree.hpp"

namespace treebary {

// Delta(u, sigma) = sum_{z not toward sigma} b_z d(u, z) - sum_{z toward sigma} b_z d(u, z).
// Negative exactly when moving from u toward the neighbor sigma lowers the
// Frechet function F(x) = sum_z b_z d(x, z)^2.
double delta(const Tree& tree, const DiscreteMeasure& nu, NodeId u, NodeId toward);

struct CenterOfMass {
  bool on_node = true;
  NodeId node;         // valid when on_node
  EdgeId edge;         // valid when !on_node
  double offset = 0.0; // distance from the upper endpoint u_e along edge
  NodeId snapped;      // nearest endpoint; exact midpoints go to v_e
};

// Minimizer of the Frechet function over the tree continuum.
CenterOfMass center_of_mass(const Tree& tree, const DiscreteMeasure& nu);

// Same, for a sub-measure given as parallel arrays (masses need not sum to 1
// but must have positive total).
CenterOfMass center_of_mass(const Tree& tree, std::span<const NodeId> supports,
                            std::span<const double> masses);

struct KMeansOptions {
  int max_iters = 100;
  // Independent Lloyd runs with seeds seed, seed + 1, ...; the lowest
  // objective wins, ties to the earliest run. The first run uses
  // farthest-point seeding, later ones mass-weighted D^2 sampling.
  int restarts = 10;
};

struct TreeClustering {
  std::vector<std::size_t> assignments;  // per input support
  std::vector<NodeId> centroids;         // snapped centers, one per cluster
  std::vector<double> cluster_masses;
  double objective = 0.0;  // sum_j b_j d(centroid(j), z_j)^2
  int iterations = 0;      // of the winning run
  // Per iteration of the winning run: objective after the centroid update,
  // and the bound on how much snapping may have raised it.
  std::vector<double> objective_trace;
  std::vector<double> snap_bound;
};

TreeClustering tree_kmeans(const Tree& tree, std::span<const NodeId> supports,
                           std::span<const double> masses, int kappa, std::uint64_t seed,
                           KMeansOptions options = {});

// Barycenter with at most kappa supports: the unconstrained barycenter, then
// k-means on its supports when it has more than kappa.
BarycenterResult constrained_tw_barycenter(const Tree& tree, const WeightedMeasureSet& set,
                                           int kappa, std::uint64_t seed,
                                           KMeansOptions options = {});

}  // namespace treebary
