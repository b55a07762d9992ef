#pragma once

// Benchmark suites shared by the CLI `bench` command and the acceptance run.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace treebary::suites {

struct OracleRow {
  std::size_t nodes = 0;
  std::size_t mu_supports = 0;
  std::size_t nu_supports = 0;
  double tw = 0.0;
  double exact = 0.0;
};

// Random trees with at most max_nodes nodes and U(0.1, 2) edge weights,
// measure pairs with at most max_supports supports each.
std::vector<OracleRow> tw_vs_oracle(std::size_t instances, std::size_t max_nodes,
                                    std::size_t max_supports, std::uint64_t seed);

struct ScalingRow {
  std::size_t measures = 0;
  std::size_t tree_nodes = 0;
  double objective = 0.0;
  double seconds = 0.0;
};

// Unconstrained barycenter of n Gaussian point clouds on one sampled tree.
std::vector<ScalingRow> barycenter_scaling(const std::vector<std::size_t>& sizes,
                                           std::size_t points_per_measure, std::uint64_t seed);

struct Comparison {
  std::size_t measures = 0;
  std::size_t supports = 0;
  std::size_t fixed_support = 0;
  int sinkhorn_iters = 0;
  double sinkhorn_epsilon = 0.0;
  double marginal_violation = 0.0;
  // Both barycenters scored by the same TW objective on the sampled tree.
  double tw_objective = 0.0;
  double sinkhorn_tw_objective = 0.0;
  // Tree sampling, attachment and barycenter.
  double tw_seconds = 0.0;
  // Cost matrices and the Bregman iterations.
  double sinkhorn_seconds = 0.0;
};

// The fixed Sinkhorn support takes the first `support_per_measure` points of
// every input cloud.
Comparison sinkhorn_compare(std::size_t measures, std::size_t supports,
                            std::size_t support_per_measure, int iters, std::uint64_t seed);

}  // namespace treebary::suites
