#pragma once

#include <cstddef>
#include <vector>

#include "treebary/barycenter.hpp"
#include "treebary/points.hpp"
#include "treebary/tree_sampling.hpp"

namespace treebary {

// Posterior samples from m machines, one sample matrix per machine.
struct PosteriorShards {
  std::vector<PointCloud> shards;

  std::size_t machine_count() const { return shards.size(); }
  std::size_t dim() const;
  // Throws a domain error on an empty shard list, an empty shard or a
  // dimension mismatch.
  void validate() const;
};

struct WeightedSamples {
  PointCloud samples;
  std::vector<double> weights;
};

struct WaspResult {
  TreeEnsemble ensemble;
  EnsembleBarycenter barycenter;
  // Union over trees of barycenter support embeddings, weights divided by k.
  WeightedSamples samples;
};

// Uniform-weight TW barycenter of the shards' empirical measures on trees
// sampled from the pooled samples.
WaspResult wasp_aggregate(const PosteriorShards& shards, const SamplingConfig& cfg);

struct Moments {
  std::vector<double> mean;
  std::vector<double> covariance;  // dim x dim, row-major

  double cov(std::size_t r, std::size_t c) const { return covariance[r * mean.size() + c]; }
};

Moments posterior_moments(const WeightedSamples& samples);

}  // namespace treebary
