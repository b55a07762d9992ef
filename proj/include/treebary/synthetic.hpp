#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "treebary/points.hpp"
#include "treebary/wasp.hpp"

namespace treebary {

// Groups drawn from a few cluster-level Gaussian mixtures in the plane.
struct GmmGroupsConfig {
  std::size_t groups = 30;
  std::size_t points_per_group = 200;
  std::size_t clusters = 6;
  std::size_t components = 3;  // Gaussian components per cluster mixture
  std::size_t dim = 2;
  double box = 10.0;           // component means uniform in [-box, box]^dim
  double component_sd = 1.0;
  std::uint64_t seed = 0;
};

struct GmmGroups {
  std::vector<PointCloud> groups;
  std::vector<std::size_t> labels;  // cluster of every group
  std::vector<PointCloud> component_means;  // per cluster
};

// Labels are balanced (group i gets cluster i mod clusters) and then shuffled.
GmmGroups gmm_groups(const GmmGroupsConfig& cfg);

// Gaussian mean model x ~ N(theta, sigma^2 I) with prior theta ~ N(0, prior_sd^2 I).
// Observations are split evenly across machines; every subset posterior raises
// its likelihood to the power `machines` and is sampled exactly.
struct ConjugateGaussianConfig {
  std::size_t dim = 2;
  std::size_t observations = 10000;
  std::size_t machines = 10;
  std::size_t samples_per_machine = 1000;
  double sigma = 1.0;
  double prior_sd = 10.0;
  std::uint64_t seed = 0;
};

struct ConjugateGaussian {
  PosteriorShards shards;
  std::vector<double> true_theta;
  std::vector<double> full_mean;  // full-data posterior mean
  double full_sd = 0.0;           // per-coordinate full-data posterior sd
};

ConjugateGaussian conjugate_gaussian(const ConjugateGaussianConfig& cfg);

// `count` point clouds of `size` points each; cloud i is an isotropic unit
// Gaussian around a center drawn uniformly in [-box, box]^dim.
std::vector<PointCloud> gaussian_clouds(std::size_t count, std::size_t size, std::size_t dim,
                                        double box, std::uint64_t seed);

}  // namespace treebary
