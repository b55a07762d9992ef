#include "treebary/tree_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <random>

#include <fmt/format.h>

#include "treebary/error.hpp"
#include "treebary/parallel.hpp"

namespace treebary {

void SamplingConfig::validate() const {
  require(kappa >= 2, ErrorKind::Domain, fmt::format("kappa must be at least 2, got {}", kappa));
  require(depth >= 2, ErrorKind::Domain, fmt::format("depth must be at least 2, got {}", depth));
  require(num_trees >= 1, ErrorKind::Domain,
          fmt::format("num_trees must be at least 1, got {}", num_trees));
  require(std::isfinite(min_edge_weight) && min_edge_weight > 0.0, ErrorKind::Domain,
          fmt::format("min_edge_weight must be positive, got {}", min_edge_weight));
}

namespace {

// Farthest-point clustering restricted to points[subset[.]]. Returned
// centers and assignments index into subset.
PointClustering cluster_subset(const PointCloud& points, std::span<const std::size_t> subset,
                               std::size_t k, std::mt19937_64& rng) {
  PointClustering out;
  const std::size_t n = subset.size();
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  out.centers.push_back(pick(rng));
  out.assignment.assign(n, 0);
  std::vector<double> nearest(n);
  for (std::size_t i = 0; i < n; ++i) {
    nearest[i] = squared_distance(points[subset[i]], points[subset[out.centers[0]]]);
  }
  while (out.centers.size() < std::min(k, n)) {
    const auto far = std::max_element(nearest.begin(), nearest.end());
    if (*far <= 0.0) {
      break;
    }
    const std::size_t c = static_cast<std::size_t>(far - nearest.begin());
    const std::size_t label = out.centers.size();
    out.centers.push_back(c);
    for (std::size_t i = 0; i < n; ++i) {
      const double d = squared_distance(points[subset[i]], points[subset[c]]);
      if (d < nearest[i]) {
        nearest[i] = d;
        out.assignment[i] = label;
      }
    }
  }
  out.radius = std::sqrt(*std::max_element(nearest.begin(), nearest.end()));
  return out;
}

}  // namespace

PointClustering farthest_point_clustering(const PointCloud& points, std::size_t k,
                                          std::uint64_t seed) {
  require(k >= 1, ErrorKind::Domain, "farthest-point clustering needs k >= 1");
  require(!points.empty(), ErrorKind::Domain, "farthest-point clustering of zero points");
  std::vector<std::size_t> all(points.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    all[i] = i;
  }
  std::mt19937_64 rng(seed);
  return cluster_subset(points, all, k, rng);
}

SampledTree sample_tree(const PointCloud& points, const SamplingConfig& cfg,
                        std::uint64_t tree_seed) {
  cfg.validate();
  require(!points.empty(), ErrorKind::Domain, "cannot sample a tree over zero points");
  std::mt19937_64 rng(tree_seed);

  struct Pending {
    std::size_t node;
    int depth;
    std::vector<std::size_t> members;
  };
  std::vector<std::optional<NodeId>> parent{std::nullopt};
  std::vector<double> weight{0.0};
  std::vector<std::vector<double>> embedding{centroid(points)};
  std::vector<NodeId> paths(points.size(), NodeId(0));

  std::deque<Pending> queue;
  {
    std::vector<std::size_t> all(points.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
      all[i] = i;
    }
    queue.push_back({0, 1, std::move(all)});
  }
  while (!queue.empty()) {
    Pending job = std::move(queue.front());
    queue.pop_front();
    for (const std::size_t i : job.members) {
      paths[i] = NodeId(job.node);
    }
    if (job.depth >= cfg.depth || job.members.size() <= 1) {
      continue;
    }
    const auto split =
        cluster_subset(points, job.members, static_cast<std::size_t>(cfg.kappa), rng);
    std::vector<std::vector<std::size_t>> groups(split.centers.size());
    for (std::size_t i = 0; i < job.members.size(); ++i) {
      groups[split.assignment[i]].push_back(job.members[i]);
    }
    for (std::size_t c = 0; c < groups.size(); ++c) {
      if (groups[c].empty()) {
        continue;
      }
      const auto center = points[job.members[split.centers[c]]];
      const std::size_t id = parent.size();
      parent.emplace_back(NodeId(job.node));
      weight.push_back(
          std::max(euclidean_distance(embedding[job.node], center), cfg.min_edge_weight));
      embedding.emplace_back(center.begin(), center.end());
      queue.push_back({id, job.depth + 1, std::move(groups[c])});
    }
  }
  return SampledTree{Tree(NodeId(0), std::move(parent), std::move(weight), std::move(embedding)),
                     std::move(paths)};
}

TreeEnsemble sample_ensemble(const PointCloud& points, const SamplingConfig& cfg) {
  cfg.validate();
  std::vector<std::optional<SampledTree>> slots(static_cast<std::size_t>(cfg.num_trees));
  parallel_for(slots.size(), [&](std::size_t t) {
    slots[t] = sample_tree(points, cfg, cfg.seed + t);
  });
  TreeEnsemble out;
  for (auto& slot : slots) {
    out.trees.push_back(std::move(slot->tree));
    out.point_paths.push_back(std::move(slot->point_paths));
  }
  return out;
}

TreeEnsemble sample_ensemble_serial(const PointCloud& points, const SamplingConfig& cfg) {
  cfg.validate();
  TreeEnsemble out;
  for (std::size_t t = 0; t < static_cast<std::size_t>(cfg.num_trees); ++t) {
    auto sampled = sample_tree(points, cfg, cfg.seed + t);
    out.trees.push_back(std::move(sampled.tree));
    out.point_paths.push_back(std::move(sampled.point_paths));
  }
  return out;
}

}  // namespace treebary
