#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "treebary/measure.hpp"
#include "treebary/points.hpp"
#include "treebary/tree.hpp"
#include "treebary/tree_kmeans.hpp"

namespace treebary {

struct MultilevelConfig {
  // Max supports per group; a single entry applies to every group.
  std::vector<int> local_k{10};
  int global_K = 2;
  double lambda = 1.0;
  int max_iters = 100;
  std::uint64_t seed = 0;
  double tolerance = 1e-6;  // relative objective change
  KMeansOptions kmeans;

  void validate(std::size_t groups) const;
  int local_k_for(std::size_t group) const;
};

// Measures are indexed [tree][group] and [tree][cluster]: with several trees
// every group keeps one local measure per tree while the assignment is shared,
// and distances are averaged over the trees.
struct MultilevelState {
  std::vector<std::vector<DiscreteMeasure>> local_measures;
  std::vector<std::vector<DiscreteMeasure>> global_measures;
  std::vector<std::size_t> group_assignment;
  // Objective after initialization, then after every iteration.
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
  // Local updates rejected because the k-means relaxation made them worse.
  std::size_t rejected_local_steps = 0;
};

// Empirical measures of the groups on every tree, indexed [tree][group].
std::vector<std::vector<DiscreteMeasure>> attach_groups(std::span<const Tree> trees,
                                                        std::span<const PointCloud> groups);

MultilevelState multilevel_fit(std::span<const Tree> trees, std::span<const PointCloud> groups,
                               const MultilevelConfig& cfg);

// sum_i D(G_i, P_i) + (lambda / m) sum_i min_k D(Q_k, G_i), D the tree-averaged
// TW distance.
double multilevel_objective(std::span<const Tree> trees,
                            const std::vector<std::vector<DiscreteMeasure>>& empirical,
                            const MultilevelState& state, const MultilevelConfig& cfg);
double multilevel_objective(std::span<const Tree> trees, std::span<const PointCloud> groups,
                            const MultilevelState& state, const MultilevelConfig& cfg);

}  // namespace treebary
