#include "treebary/tree_kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include <fmt/format.h>

#include "treebary/error.hpp"
#include "treebary/kernels.hpp"
#include "treebary/parallel.hpp"

namespace treebary {

namespace {

// Mass-weighted distances from u, split by the neighbor of u each support
// lies behind. Slot 0 is the parent (if any), then children in id order.
struct Directional {
  std::vector<NodeId> neighbors;
  std::vector<double> toward;
  double total = 0.0;

  double delta(std::size_t k) const { return total - 2.0 * toward[k]; }

  std::size_t slot_of(NodeId v) const {
    return static_cast<std::size_t>(std::find(neighbors.begin(), neighbors.end(), v) -
                                    neighbors.begin());
  }
};

Directional directional_sums(const Tree& tree, std::span<const NodeId> supports,
                             std::span<const double> masses, NodeId u) {
  Directional out;
  const auto parent = tree.parent(u);
  if (parent) {
    out.neighbors.push_back(*parent);
  }
  const auto kids = tree.children(u);
  out.neighbors.insert(out.neighbors.end(), kids.begin(), kids.end());
  out.toward.assign(out.neighbors.size(), 0.0);
  const std::size_t first_child = parent ? 1 : 0;

  for (std::size_t j = 0; j < supports.size(); ++j) {
    const NodeId z = supports[j];
    if (z == u || masses[j] == 0.0) {
      continue;
    }
    const double contribution = masses[j] * tree.distance(u, z);
    out.total += contribution;
    const NodeId next = tree.step_toward(u, z);
    std::size_t slot = 0;
    if (!parent || next != *parent) {
      slot = first_child +
             static_cast<std::size_t>(std::lower_bound(kids.begin(), kids.end(), next) -
                                      kids.begin());
    }
    out.toward[slot] += contribution;
  }
  return out;
}

double tree_upper_diameter(const Tree& tree) {
  double deepest = 0.0;
  for (std::size_t v = 0; v < tree.node_count(); ++v) {
    deepest = std::max(deepest, tree.root_distance(NodeId(v)));
  }
  return 2.0 * deepest;
}

double snap_displacement(const Tree& tree, const CenterOfMass& c) {
  if (c.on_node) {
    return 0.0;
  }
  return std::min(c.offset, tree.weight(c.edge) - c.offset);
}

}  // namespace

double delta(const Tree& tree, const DiscreteMeasure& nu, NodeId u, NodeId toward) {
  nu.check_on(tree);
  require(tree.adjacent(u, toward), ErrorKind::Domain,
          fmt::format("node {} is not adjacent to node {}", toward.value, u.value));
  const auto sums = directional_sums(tree, nu.supports(), nu.weights(), u);
  return sums.delta(sums.slot_of(toward));
}

CenterOfMass center_of_mass(const Tree& tree, std::span<const NodeId> supports,
                            std::span<const double> masses) {
  require(!supports.empty(), ErrorKind::Domain, "center of mass of an empty measure");
  require(supports.size() == masses.size(), ErrorKind::Domain,
          fmt::format("{} supports but {} masses", supports.size(), masses.size()));
  double total_mass = 0.0;
  for (std::size_t j = 0; j < supports.size(); ++j) {
    tree.check_node(supports[j]);
    total_mass += masses[j];
  }
  require(total_mass > 0.0, ErrorKind::Domain, "center of mass of a zero-mass measure");

  NodeId u = tree.root();
  for (std::size_t step = 0; step <= tree.node_count(); ++step) {
    const auto here = directional_sums(tree, supports, masses, u);
    std::size_t best = here.neighbors.size();
    double most_negative = 0.0;
    for (std::size_t k = 0; k < here.neighbors.size(); ++k) {
      if (here.delta(k) < most_negative) {
        most_negative = here.delta(k);
        best = k;
      }
    }
    if (best == here.neighbors.size()) {
      CenterOfMass c;
      c.node = u;
      c.snapped = u;
      return c;
    }

    const NodeId sigma = here.neighbors[best];
    const auto there = directional_sums(tree, supports, masses, sigma);
    const double back = there.delta(there.slot_of(u));
    if (back >= 0.0) {
      u = sigma;
      continue;
    }

    // Both ends point into the edge: the minimizer is interior, at
    // -Delta(u_e, toward v_e) / M from u_e.
    const bool sigma_is_child = tree.parent(sigma) == u;
    const NodeId upper = sigma_is_child ? u : sigma;
    const NodeId lower = sigma_is_child ? sigma : u;
    const double delta_upper = sigma_is_child ? most_negative : back;
    CenterOfMass c;
    c.on_node = false;
    c.edge = tree.edge_above(lower);
    const double w = tree.weight(c.edge);
    c.offset = std::clamp(-delta_upper / total_mass, 0.0, w);
    c.snapped = c.offset < w - c.offset ? upper : lower;
    return c;
  }
  fail(ErrorKind::Internal, "center-of-mass walk did not terminate");
}

CenterOfMass center_of_mass(const Tree& tree, const DiscreteMeasure& nu) {
  return center_of_mass(tree, nu.supports(), nu.weights());
}

namespace {

struct LloydRun {
  std::vector<std::size_t> assignments;
  std::vector<NodeId> centroids;
  double objective = 0.0;
  int iterations = 0;
  std::vector<double> objective_trace;
  std::vector<double> snap_bound;
};

double kmeans_objective(const Tree& tree, std::span<const NodeId> supports,
                        std::span<const double> masses, std::span<const NodeId> centroids,
                        std::span<const std::size_t> assignments) {
  double total = 0.0;
  for (std::size_t j = 0; j < supports.size(); ++j) {
    const double d = tree.distance(centroids[assignments[j]], supports[j]);
    total += masses[j] * d * d;
  }
  return total;
}

std::vector<NodeId> farthest_point_seeds(const Tree& tree, std::span<const NodeId> supports,
                                         std::size_t kappa, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, supports.size() - 1);
  std::vector<NodeId> seeds{supports[pick(rng)]};
  std::vector<double> nearest(supports.size());
  for (std::size_t j = 0; j < supports.size(); ++j) {
    nearest[j] = tree.distance(seeds[0], supports[j]);
  }
  while (seeds.size() < kappa) {
    const auto far = std::max_element(nearest.begin(), nearest.end());
    if (*far <= 0.0) {
      // Fewer distinct locations than clusters; pad with duplicates.
      seeds.push_back(seeds.front());
      continue;
    }
    const NodeId next = supports[static_cast<std::size_t>(far - nearest.begin())];
    seeds.push_back(next);
    for (std::size_t j = 0; j < supports.size(); ++j) {
      nearest[j] = std::min(nearest[j], tree.distance(next, supports[j]));
    }
  }
  return seeds;
}

// k-means++ style: each further seed drawn with probability proportional to
// mass times squared distance to the nearest seed so far.
std::vector<NodeId> mass_weighted_seeds(const Tree& tree, std::span<const NodeId> supports,
                                        std::span<const double> masses, std::size_t kappa,
                                        std::mt19937_64& rng) {
  std::discrete_distribution<std::size_t> first(masses.begin(), masses.end());
  std::vector<NodeId> seeds{supports[first(rng)]};
  std::vector<double> nearest(supports.size());
  for (std::size_t j = 0; j < supports.size(); ++j) {
    nearest[j] = tree.distance(seeds[0], supports[j]);
  }
  std::vector<double> score(supports.size());
  while (seeds.size() < kappa) {
    double total = 0.0;
    for (std::size_t j = 0; j < supports.size(); ++j) {
      score[j] = masses[j] * nearest[j] * nearest[j];
      total += score[j];
    }
    if (total <= 0.0) {
      seeds.push_back(seeds.front());
      continue;
    }
    std::discrete_distribution<std::size_t> next_pick(score.begin(), score.end());
    const NodeId next = supports[next_pick(rng)];
    seeds.push_back(next);
    for (std::size_t j = 0; j < supports.size(); ++j) {
      nearest[j] = std::min(nearest[j], tree.distance(next, supports[j]));
    }
  }
  return seeds;
}

LloydRun lloyd_from(const Tree& tree, std::span<const NodeId> supports,
                    std::span<const double> masses, std::vector<NodeId> start, int max_iters,
                    double diameter) {
  const std::size_t kappa = start.size();
  LloydRun run;
  run.centroids = std::move(start);
  run.assignments = kernels::nearest_centers(tree, supports, run.centroids);

  std::vector<std::vector<std::size_t>> members(kappa);
  for (int it = 1; it <= max_iters; ++it) {
    run.iterations = it;
    for (auto& m : members) {
      m.clear();
    }
    for (std::size_t j = 0; j < supports.size(); ++j) {
      members[run.assignments[j]].push_back(j);
    }

    std::vector<CenterOfMass> centers(kappa);
    std::vector<char> active(kappa, 0);
    parallel_for(kappa, [&](std::size_t i) {
      std::vector<NodeId> s;
      std::vector<double> b;
      for (const std::size_t j : members[i]) {
        s.push_back(supports[j]);
        b.push_back(masses[j]);
      }
      double mass = 0.0;
      for (const double x : b) {
        mass += x;
      }
      if (mass > 0.0) {
        centers[i] = center_of_mass(tree, s, b);
        active[i] = 1;
      }
    });

    bool reseeded = false;
    double bound = 0.0;
    for (std::size_t i = 0; i < kappa; ++i) {
      if (active[i]) {
        run.centroids[i] = centers[i].snapped;
        double mass = 0.0;
        for (const std::size_t j : members[i]) {
          mass += masses[j];
        }
        const double disp = snap_displacement(tree, centers[i]);
        bound += mass * (2.0 * disp * diameter + disp * disp);
        continue;
      }
      // Empty (or massless) cluster: move it to the support farthest from
      // its current centroid, if that improves anything at all.
      std::size_t far = 0;
      double far_distance = -1.0;
      for (std::size_t j = 0; j < supports.size(); ++j) {
        const double d = tree.distance(run.centroids[run.assignments[j]], supports[j]);
        if (masses[j] > 0.0 && d > far_distance) {
          far_distance = d;
          far = j;
        }
      }
      if (far_distance > 0.0) {
        run.centroids[i] = supports[far];
        reseeded = true;
      }
    }

    auto next = kernels::nearest_centers(tree, supports, run.centroids);
    const bool stable = next == run.assignments;
    run.assignments = std::move(next);
    run.objective_trace.push_back(
        kmeans_objective(tree, supports, masses, run.centroids, run.assignments));
    run.snap_bound.push_back(bound);
    if (stable && !reseeded) {
      break;
    }
  }
  run.objective = run.objective_trace.back();
  return run;
}

LloydRun lloyd(const Tree& tree, std::span<const NodeId> supports, std::span<const double> masses,
               std::size_t kappa, std::uint64_t seed, bool farthest, int max_iters,
               double diameter) {
  std::mt19937_64 rng(seed);
  auto start = farthest ? farthest_point_seeds(tree, supports, kappa, rng)
                        : mass_weighted_seeds(tree, supports, masses, kappa, rng);
  return lloyd_from(tree, supports, masses, std::move(start), max_iters, diameter);
}

// Best single move of one centroid onto a support node, judged by the
// objective under nearest-centroid assignment. Empty when nothing improves.
std::optional<std::vector<NodeId>> best_swap(const Tree& tree, std::span<const NodeId> supports,
                                             std::span<const double> masses,
                                             const std::vector<NodeId>& centroids,
                                             const std::vector<NodeId>& candidates) {
  const std::size_t m = supports.size();
  const std::size_t kappa = centroids.size();
  // nearest and second-nearest squared distances to the current centroids
  std::vector<double> d1(m, std::numeric_limits<double>::infinity());
  std::vector<double> d2(m, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> owner(m, 0);
  for (std::size_t i = 0; i < kappa; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = tree.distance(centroids[i], supports[j]);
      const double sq = d * d;
      if (sq < d1[j]) {
        d2[j] = d1[j];
        d1[j] = sq;
        owner[j] = i;
      } else if (sq < d2[j]) {
        d2[j] = sq;
      }
    }
  }
  double current = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    current += masses[j] * d1[j];
  }
  double best = current;
  std::size_t best_i = kappa;
  std::size_t best_c = 0;
  std::vector<double> to_c(m);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (std::find(centroids.begin(), centroids.end(), candidates[c]) != centroids.end()) {
      continue;
    }
    for (std::size_t j = 0; j < m; ++j) {
      const double d = tree.distance(candidates[c], supports[j]);
      to_c[j] = d * d;
    }
    for (std::size_t i = 0; i < kappa; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double keep = owner[j] == i ? d2[j] : d1[j];
        total += masses[j] * std::min(keep, to_c[j]);
      }
      if (total < best - 1e-12 * std::max(1.0, current)) {
        best = total;
        best_i = i;
        best_c = c;
      }
    }
  }
  if (best_i == kappa) {
    return std::nullopt;
  }
  auto out = centroids;
  out[best_i] = candidates[best_c];
  return out;
}

// Alternates single swaps with Lloyd until neither improves the objective.
void refine(const Tree& tree, std::span<const NodeId> supports, std::span<const double> masses,
            const std::vector<NodeId>& candidates, int max_iters, double diameter,
            LloydRun& run) {
  for (int round = 0; round < max_iters; ++round) {
    auto swapped = best_swap(tree, supports, masses, run.centroids, candidates);
    if (!swapped) {
      return;
    }
    auto next = lloyd_from(tree, supports, masses, std::move(*swapped), max_iters, diameter);
    if (next.objective >= run.objective) {
      return;
    }
    run.iterations += next.iterations;
    run.objective_trace.insert(run.objective_trace.end(), next.objective_trace.begin(),
                               next.objective_trace.end());
    run.snap_bound.insert(run.snap_bound.end(), next.snap_bound.begin(), next.snap_bound.end());
    run.centroids = std::move(next.centroids);
    run.assignments = std::move(next.assignments);
    run.objective = next.objective;
  }
}

}  // namespace

TreeClustering tree_kmeans(const Tree& tree, std::span<const NodeId> supports,
                           std::span<const double> masses, int kappa, std::uint64_t seed,
                           KMeansOptions options) {
  require(kappa >= 1, ErrorKind::Domain, fmt::format("kappa must be at least 1, got {}", kappa));
  require(!supports.empty(), ErrorKind::Domain, "k-means over an empty support set");
  require(supports.size() == masses.size(), ErrorKind::Domain,
          fmt::format("{} supports but {} masses", supports.size(), masses.size()));
  require(options.max_iters >= 1 && options.restarts >= 1, ErrorKind::Domain,
          "max_iters and restarts must be positive");
  double total = 0.0;
  for (std::size_t j = 0; j < supports.size(); ++j) {
    tree.check_node(supports[j]);
    require(std::isfinite(masses[j]) && masses[j] >= 0.0, ErrorKind::Domain,
            fmt::format("invalid mass {}", masses[j]));
    total += masses[j];
  }
  require(std::abs(total - 1.0) <= kMassTolerance, ErrorKind::Domain,
          fmt::format("masses sum to {:.17g}, expected 1", total));

  TreeClustering out;
  std::vector<NodeId> distinct(supports.begin(), supports.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  if (static_cast<std::size_t>(kappa) >= distinct.size()) {
    out.centroids = distinct;
    out.assignments.resize(supports.size());
    for (std::size_t j = 0; j < supports.size(); ++j) {
      out.assignments[j] = static_cast<std::size_t>(
          std::lower_bound(distinct.begin(), distinct.end(), supports[j]) - distinct.begin());
    }
    out.objective_trace.push_back(0.0);
    out.snap_bound.push_back(0.0);
  } else {
    const double diameter = tree_upper_diameter(tree);
    std::optional<LloydRun> best;
    for (int r = 0; r < options.restarts; ++r) {
      auto run = lloyd(tree, supports, masses, static_cast<std::size_t>(kappa),
                       seed + static_cast<std::uint64_t>(r), r == 0, options.max_iters, diameter);
      if (!best || run.objective < best->objective) {
        best = std::move(run);
      }
    }
    // optimal centroids can sit on internal nodes, so swaps range over every
    // ancestor of a support
    std::vector<char> seen(tree.node_count(), 0);
    std::vector<NodeId> candidates;
    for (NodeId v : distinct) {
      for (std::optional<NodeId> u = v; u && !seen[u->value]; u = tree.parent(*u)) {
        seen[u->value] = 1;
        candidates.push_back(*u);
      }
    }
    std::sort(candidates.begin(), candidates.end());
    refine(tree, supports, masses, candidates, options.max_iters, diameter, *best);
    out.assignments = std::move(best->assignments);
    out.centroids = std::move(best->centroids);
    out.objective = best->objective;
    out.iterations = best->iterations;
    out.objective_trace = std::move(best->objective_trace);
    out.snap_bound = std::move(best->snap_bound);
  }

  out.cluster_masses.assign(out.centroids.size(), 0.0);
  for (std::size_t j = 0; j < supports.size(); ++j) {
    out.cluster_masses[out.assignments[j]] += masses[j];
  }
  return out;
}

BarycenterResult constrained_tw_barycenter(const Tree& tree, const WeightedMeasureSet& set,
                                           int kappa, std::uint64_t seed,
                                           KMeansOptions options) {
  require(kappa >= 1, ErrorKind::Domain, fmt::format("kappa must be at least 1, got {}", kappa));
  auto full = tw_barycenter(tree, set);
  if (full.barycenter.size() <= static_cast<std::size_t>(kappa)) {
    return full;
  }
  const auto clustering = tree_kmeans(tree, full.barycenter.supports(),
                                      full.barycenter.weights(), kappa, seed, options);
  DiscreteMeasure reduced(clustering.centroids, clustering.cluster_masses);
  auto z = tree_map(tree, reduced);
  const double objective = barycenter_objective(tree, reduced, set);
  return BarycenterResult{std::move(reduced), objective, std::move(z), full.objective,
                          full.median_feasible, full.min_recovered_weight};
}

}  // namespace treebary
