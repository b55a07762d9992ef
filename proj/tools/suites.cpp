#include "suites.hpp"

#include <algorithm>
#include <chrono>
#include <random>

#include "treebary/barycenter.hpp"
#include "treebary/measure.hpp"
#include "treebary/oracle.hpp"
#include "treebary/synthetic.hpp"
#include "treebary/tree_sampling.hpp"
#include "treebary/tw_distance.hpp"

namespace treebary::suites {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Tree random_tree(std::mt19937_64& rng, std::size_t nodes) {
  std::uniform_real_distribution<double> w(0.1, 2.0);
  std::vector<std::optional<NodeId>> parent{std::nullopt};
  std::vector<double> weight{0.0};
  for (std::size_t v = 1; v < nodes; ++v) {
    parent.emplace_back(NodeId(std::uniform_int_distribution<std::size_t>(0, v - 1)(rng)));
    weight.push_back(w(rng));
  }
  return Tree(NodeId(0), std::move(parent), std::move(weight));
}

DiscreteMeasure random_measure(std::mt19937_64& rng, const Tree& tree, std::size_t max_supports) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(
      1, std::min(max_supports, tree.node_count()))(rng);
  std::vector<std::size_t> ids(tree.node_count());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    ids[i] = i;
  }
  std::shuffle(ids.begin(), ids.end(), rng);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<NodeId> s;
  std::vector<double> w;
  for (std::size_t i = 0; i < n; ++i) {
    s.emplace_back(ids[i]);
    w.push_back(u(rng));
  }
  return DiscreteMeasure(std::move(s), std::move(w));
}

PointCloud pooled(const std::vector<PointCloud>& clouds) {
  PointCloud out;
  for (const auto& c : clouds) {
    out.append(c);
  }
  return out;
}

}  // namespace

std::vector<OracleRow> tw_vs_oracle(std::size_t instances, std::size_t max_nodes,
                                    std::size_t max_supports, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<OracleRow> rows;
  for (std::size_t k = 0; k < instances; ++k) {
    const std::size_t nodes = std::uniform_int_distribution<std::size_t>(2, max_nodes)(rng);
    const auto tree = random_tree(rng, nodes);
    const auto mu = random_measure(rng, tree, max_supports);
    const auto nu = random_measure(rng, tree, max_supports);
    std::vector<double> cost;
    for (const NodeId a : mu.supports()) {
      for (const NodeId b : nu.supports()) {
        cost.push_back(tree.distance(a, b));
      }
    }
    rows.push_back({nodes, mu.size(), nu.size(), tw(tree, mu, nu),
                    exact_ot(cost, mu.weights(), nu.weights()).cost});
  }
  return rows;
}

std::vector<ScalingRow> barycenter_scaling(const std::vector<std::size_t>& sizes,
                                           std::size_t points_per_measure, std::uint64_t seed) {
  std::vector<ScalingRow> rows;
  for (const std::size_t n : sizes) {
    const auto clouds = gaussian_clouds(n, points_per_measure, 2, 10.0, seed + n);
    SamplingConfig cfg;
    cfg.seed = seed;
    const auto tree = sample_tree(pooled(clouds), cfg, seed).tree;
    std::vector<DiscreteMeasure> measures;
    for (const auto& c : clouds) {
      measures.push_back(uniform_empirical(tree, c));
    }
    const auto set = WeightedMeasureSet::uniform(std::move(measures));
    const auto start = Clock::now();
    const auto result = tw_barycenter(tree, set);
    rows.push_back({n, tree.node_count(), result.objective, seconds_since(start)});
  }
  return rows;
}

Comparison sinkhorn_compare(std::size_t measures, std::size_t supports,
                            std::size_t support_per_measure, int iters, std::uint64_t seed) {
  const auto clouds = gaussian_clouds(measures, supports, 2, 10.0, seed);
  Comparison out;
  out.measures = measures;
  out.supports = supports;
  out.sinkhorn_iters = iters;

  auto start = Clock::now();
  SamplingConfig cfg;
  cfg.seed = seed;
  const auto tree = sample_tree(pooled(clouds), cfg, seed).tree;
  std::vector<DiscreteMeasure> attached;
  for (const auto& c : clouds) {
    attached.push_back(uniform_empirical(tree, c));
  }
  const auto set = WeightedMeasureSet::uniform(std::move(attached));
  const auto bary = tw_barycenter(tree, set);
  out.tw_seconds = seconds_since(start);
  out.tw_objective = bary.objective;

  start = Clock::now();
  PointCloud grid;
  for (const auto& c : clouds) {
    for (std::size_t j = 0; j < std::min(support_per_measure, c.size()); ++j) {
      grid.push_back(c[j]);
    }
  }
  std::vector<SinkhornInput> inputs(measures);
  for (std::size_t i = 0; i < measures; ++i) {
    const auto& c = clouds[i];
    inputs[i].weights.assign(c.size(), 1.0 / static_cast<double>(c.size()));
    inputs[i].cost.resize(grid.size() * c.size());
    for (std::size_t s = 0; s < grid.size(); ++s) {
      for (std::size_t j = 0; j < c.size(); ++j) {
        inputs[i].cost[s * c.size() + j] = euclidean_distance(grid[s], c[j]);
      }
    }
  }
  const std::vector<double> p(measures, 1.0 / static_cast<double>(measures));
  SinkhornOptions opt;
  opt.iters = iters;
  const auto sk = sinkhorn_barycenter(grid.size(), inputs, p, opt);
  out.sinkhorn_seconds = seconds_since(start);
  out.fixed_support = grid.size();
  out.sinkhorn_epsilon = sk.epsilon;
  out.marginal_violation = sk.marginal_violation;

  const auto on_tree = from_points(tree, grid, sk.weights);
  out.sinkhorn_tw_objective = barycenter_objective(tree, on_tree, set);
  return out;
}

}  // namespace treebary::suites
