#include "treebary/multilevel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>

#include <fmt/format.h>

#include "treebary/barycenter.hpp"
#include "treebary/error.hpp"
#include "treebary/parallel.hpp"
#include "treebary/tw_distance.hpp"

namespace treebary {

void MultilevelConfig::validate(std::size_t groups) const {
  require(global_K >= 2, ErrorKind::Domain,
          fmt::format("global_K must be at least 2, got {}", global_K));
  require(std::isfinite(lambda) && lambda > 0.0, ErrorKind::Domain,
          fmt::format("lambda must be positive, got {}", lambda));
  require(max_iters >= 1, ErrorKind::Domain, "max_iters must be positive");
  require(tolerance >= 0.0, ErrorKind::Domain, "tolerance must be non-negative");
  require(local_k.size() == 1 || local_k.size() == groups, ErrorKind::Domain,
          fmt::format("{} local_k values for {} groups", local_k.size(), groups));
  for (const int k : local_k) {
    require(k >= 1, ErrorKind::Domain, fmt::format("local_k must be at least 1, got {}", k));
  }
}

int MultilevelConfig::local_k_for(std::size_t group) const {
  return local_k.size() == 1 ? local_k.front() : local_k[group];
}

namespace {

using Grid = std::vector<std::vector<DiscreteMeasure>>;  // [tree][index]
using MapGrid = std::vector<std::vector<EdgeVector>>;

MapGrid map_grid(std::span<const Tree> trees, const Grid& measures) {
  MapGrid out(trees.size());
  for (std::size_t t = 0; t < trees.size(); ++t) {
    for (const auto& mu : measures[t]) {
      out[t].push_back(tree_map(trees[t], mu));
    }
  }
  return out;
}

double averaged(const MapGrid& a, std::size_t i, const MapGrid& b, std::size_t k) {
  double total = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    total += l1_distance(a[t][i], b[t][k]);
  }
  return total / static_cast<double>(a.size());
}

std::vector<std::size_t> assign(const MapGrid& local, const MapGrid& global) {
  const std::size_t m = local.front().size();
  const std::size_t K = global.front().size();
  std::vector<std::size_t> out(m);
  parallel_for(m, [&](std::size_t i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
      const double d = averaged(local, i, global, k);
      if (d < best) {
        best = d;
        out[i] = k;
      }
    }
  });
  return out;
}

double objective_from_maps(const MapGrid& empirical, const MapGrid& local, const MapGrid& global,
                           double lambda) {
  const std::size_t m = local.front().size();
  const std::size_t K = global.front().size();
  double fit = 0.0;
  double spread = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    fit += averaged(local, i, empirical, i);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
      best = std::min(best, averaged(local, i, global, k));
    }
    spread += best;
  }
  return fit + lambda / static_cast<double>(m) * spread;
}

// Independent of the group so that identical groups get identical local fits.
std::uint64_t local_seed(std::uint64_t seed, std::size_t tree) {
  return seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(tree) + 1);
}

// First pick uniform, the rest drawn proportionally to the distance to the
// nearest pick. Falls back to repeating the first pick once every group
// coincides with a pick.
std::vector<std::size_t> spread_picks(const MapGrid& maps, std::size_t K, std::mt19937_64& rng) {
  const std::size_t m = maps.front().size();
  std::vector<std::size_t> picks{std::uniform_int_distribution<std::size_t>(0, m - 1)(rng)};
  std::vector<double> nearest(m, std::numeric_limits<double>::infinity());
  while (picks.size() < K) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      nearest[i] = std::min(nearest[i], averaged(maps, i, maps, picks.back()));
      total += nearest[i];
    }
    if (!(total > 0.0)) {
      picks.push_back(picks.front());
      continue;
    }
    double target = std::uniform_real_distribution<double>(0.0, total)(rng);
    std::size_t chosen = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (nearest[i] <= 0.0) {
        continue;
      }
      chosen = i;
      target -= nearest[i];
      if (target < 0.0) {
        break;
      }
    }
    picks.push_back(chosen);
  }
  return picks;
}

}  // namespace

Grid attach_groups(std::span<const Tree> trees, std::span<const PointCloud> groups) {
  Grid out(trees.size());
  for (std::size_t t = 0; t < trees.size(); ++t) {
    out[t].reserve(groups.size());
    for (const auto& g : groups) {
      out[t].push_back(uniform_empirical(trees[t], g));
    }
  }
  return out;
}

double multilevel_objective(std::span<const Tree> trees, const Grid& empirical,
                            const MultilevelState& state, const MultilevelConfig& cfg) {
  require(!trees.empty(), ErrorKind::Domain, "no trees");
  require(empirical.size() == trees.size() && state.local_measures.size() == trees.size() &&
              state.global_measures.size() == trees.size(),
          ErrorKind::Structural, "state does not match the tree ensemble");
  return objective_from_maps(map_grid(trees, empirical), map_grid(trees, state.local_measures),
                             map_grid(trees, state.global_measures), cfg.lambda);
}

double multilevel_objective(std::span<const Tree> trees, std::span<const PointCloud> groups,
                            const MultilevelState& state, const MultilevelConfig& cfg) {
  return multilevel_objective(trees, attach_groups(trees, groups), state, cfg);
}

MultilevelState multilevel_fit(std::span<const Tree> trees, std::span<const PointCloud> groups,
                               const MultilevelConfig& cfg) {
  require(!trees.empty(), ErrorKind::Domain, "multilevel clustering needs at least one tree");
  require(!groups.empty(), ErrorKind::Domain, "multilevel clustering needs at least one group");
  for (std::size_t i = 0; i < groups.size(); ++i) {
    require(!groups[i].empty(), ErrorKind::Domain, fmt::format("group {} is empty", i));
  }
  cfg.validate(groups.size());

  const std::size_t T = trees.size();
  const std::size_t m = groups.size();
  const std::size_t K = static_cast<std::size_t>(cfg.global_K);
  const double lambda_over_m = cfg.lambda / static_cast<double>(m);
  const Grid empirical = attach_groups(trees, groups);
  const MapGrid empirical_maps = map_grid(trees, empirical);

  // G_i starts as the constrained barycenter of P_i alone.
  std::vector<std::vector<std::optional<DiscreteMeasure>>> slots(
      T, std::vector<std::optional<DiscreteMeasure>>(m));
  parallel_for(T * m, [&](std::size_t job) {
    const std::size_t t = job / m;
    const std::size_t i = job % m;
    const auto set = WeightedMeasureSet::uniform({empirical[t][i]});
    slots[t][i] = constrained_tw_barycenter(trees[t], set, cfg.local_k_for(i),
                                            local_seed(cfg.seed, t), cfg.kmeans)
                      .barycenter;
  });
  MultilevelState state;
  state.local_measures.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    for (auto& slot : slots[t]) {
      state.local_measures[t].push_back(std::move(*slot));
    }
  }

  // Q_k from K groups spread out by distance; with fewer distinct groups than
  // clusters the surplus duplicates the first pick and is re-seeded as an
  // empty cluster.
  std::mt19937_64 rng(cfg.seed);
  const auto picks = spread_picks(map_grid(trees, state.local_measures), K, rng);
  state.global_measures.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    for (const std::size_t i : picks) {
      state.global_measures[t].push_back(state.local_measures[t][i]);
    }
  }

  MapGrid local_maps = map_grid(trees, state.local_measures);
  MapGrid global_maps = map_grid(trees, state.global_measures);
  state.group_assignment = assign(local_maps, global_maps);
  state.objective_trace.push_back(
      objective_from_maps(empirical_maps, local_maps, global_maps, cfg.lambda));

  const std::vector<double> pair_weights{1.0 / (1.0 + lambda_over_m),
                                         lambda_over_m / (1.0 + lambda_over_m)};
  for (int it = 1; it <= cfg.max_iters; ++it) {
    state.iterations = it;
    const auto previous = state.group_assignment;

    // (a) assignment
    auto assignment = assign(local_maps, global_maps);

    // (b) local update: two-measure constrained barycenter, kept only when it
    // does not raise the group's own term.
    std::vector<char> rejected(T * m, 0);
    parallel_for(T * m, [&](std::size_t job) {
      const std::size_t t = job / m;
      const std::size_t i = job % m;
      const std::size_t k = assignment[i];
      const WeightedMeasureSet set({empirical[t][i], state.global_measures[t][k]}, pair_weights);
      auto candidate = constrained_tw_barycenter(trees[t], set, cfg.local_k_for(i),
                                                 local_seed(cfg.seed, t), cfg.kmeans)
                           .barycenter;
      auto candidate_map = tree_map(trees[t], candidate);
      const double before = l1_distance(local_maps[t][i], empirical_maps[t][i]) +
                            lambda_over_m * l1_distance(local_maps[t][i], global_maps[t][k]);
      const double after = l1_distance(candidate_map, empirical_maps[t][i]) +
                           lambda_over_m * l1_distance(candidate_map, global_maps[t][k]);
      if (after <= before) {
        state.local_measures[t][i] = std::move(candidate);
        local_maps[t][i] = std::move(candidate_map);
      } else {
        rejected[job] = 1;
      }
    });
    state.rejected_local_steps += static_cast<std::size_t>(
        std::count(rejected.begin(), rejected.end(), static_cast<char>(1)));

    // (c) re-assignment
    assignment = assign(local_maps, global_maps);

    // (d) global update: exact barycenter of each cluster's local measures.
    std::vector<std::vector<std::size_t>> members(K);
    for (std::size_t i = 0; i < m; ++i) {
      members[assignment[i]].push_back(i);
    }
    parallel_for(T * K, [&](std::size_t job) {
      const std::size_t t = job / K;
      const std::size_t k = job % K;
      if (members[k].empty()) {
        return;
      }
      std::vector<DiscreteMeasure> cluster;
      for (const std::size_t i : members[k]) {
        cluster.push_back(state.local_measures[t][i]);
      }
      auto result = tw_barycenter(trees[t], WeightedMeasureSet::uniform(std::move(cluster)));
      global_maps[t][k] = tree_map(trees[t], result.barycenter);
      state.global_measures[t][k] = std::move(result.barycenter);
    });
    std::vector<char> taken(m, 0);
    for (std::size_t k = 0; k < K; ++k) {
      if (!members[k].empty()) {
        continue;
      }
      std::size_t far = m;
      double far_distance = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double d = averaged(local_maps, i, global_maps, assignment[i]);
        if (!taken[i] && d > far_distance) {
          far_distance = d;
          far = i;
        }
      }
      if (far == m) {
        continue;
      }
      taken[far] = 1;
      for (std::size_t t = 0; t < T; ++t) {
        state.global_measures[t][k] = state.local_measures[t][far];
        global_maps[t][k] = local_maps[t][far];
      }
    }

    state.group_assignment = assign(local_maps, global_maps);
    const double before = state.objective_trace.back();
    const double now = objective_from_maps(empirical_maps, local_maps, global_maps, cfg.lambda);
    state.objective_trace.push_back(now);
    const double scale = std::max(std::abs(before), std::numeric_limits<double>::min());
    if (state.group_assignment == previous && std::abs(before - now) <= cfg.tolerance * scale) {
      state.converged = true;
      break;
    }
  }
  return state;
}

}  // namespace treebary
