#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace treebary {

inline constexpr std::size_t kMaxOracleSupports = 64;

struct TransportPlan {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> matrix;  // rows x cols, row-major
  double cost = 0.0;
  // Dual potentials: f_i + g_j <= c_ij, with equality on the plan's support.
  std::vector<double> row_dual;
  std::vector<double> col_dual;

  double at(std::size_t i, std::size_t j) const { return matrix[i * cols + j]; }
};

// Exact discrete OT by successive shortest paths on the bipartite transport
// network. cost is mu.size() x nu.size(), row-major. Refuses instances with
// more than kMaxOracleSupports supports on either side.
TransportPlan exact_ot(std::span<const double> cost, std::span<const double> mu,
                       std::span<const double> nu);

// One input of a fixed-support barycenter: its weights and the cost from
// every barycenter support point to each of its supports (support x size).
struct SinkhornInput {
  std::vector<double> cost;
  std::vector<double> weights;
};

struct SinkhornOptions {
  double epsilon = 0.0;  // 0 selects 0.1 x median of all cost entries
  int iters = 100;
};

struct SinkhornResult {
  std::vector<double> weights;  // on the fixed support, sums to 1
  double epsilon = 0.0;
  // Largest l1 gap between an input and its plan's second marginal.
  double marginal_violation = 0.0;
};

// Iterative Bregman projections. Throws a numeric error when the Gibbs
// kernel underflows.
SinkhornResult sinkhorn_barycenter(std::size_t support_size, std::span<const SinkhornInput> inputs,
                                   std::span<const double> mixture_weights,
                                   SinkhornOptions options = {});

}  // namespace treebary
