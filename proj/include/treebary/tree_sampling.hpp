#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "treebary/points.hpp"
#include "treebary/tree.hpp"

namespace treebary {

struct SamplingConfig {
  int kappa = 4;  // clusters per node
  int depth = 6;  // deepest level; the root is level 1
  int num_trees = 1;
  std::uint64_t seed = 0;
  double min_edge_weight = 1e-6;

  void validate() const;
};

struct PointClustering {
  std::vector<std::size_t> centers;     // point indices, in selection order
  std::vector<std::size_t> assignment;  // per point, index into centers
  double radius = 0.0;                  // max distance of a point to its center
};

// Gonzalez farthest-point clustering. The first center is uniform at random;
// ties in the farthest/nearest choices go to the lowest index. Stops early
// once every point coincides with a center, so it may return fewer than k.
PointClustering farthest_point_clustering(const PointCloud& points, std::size_t k,
                                          std::uint64_t seed);

struct SampledTree {
  Tree tree;
  std::vector<NodeId> point_paths;  // leaf of every input point
};

// Recursive farthest-point splitting. Node ids follow creation order (level
// by level), embeddings are the cluster centers, the root sits at the centroid.
SampledTree sample_tree(const PointCloud& points, const SamplingConfig& cfg,
                        std::uint64_t tree_seed);

struct TreeEnsemble {
  std::vector<Tree> trees;
  std::vector<std::vector<NodeId>> point_paths;

  std::size_t size() const { return trees.size(); }
};

// cfg.num_trees trees with seeds cfg.seed + i, sampled in parallel.
TreeEnsemble sample_ensemble(const PointCloud& points, const SamplingConfig& cfg);
TreeEnsemble sample_ensemble_serial(const PointCloud& points, const SamplingConfig& cfg);

}  // namespace treebary
