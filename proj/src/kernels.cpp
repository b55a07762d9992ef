#include "treebary/kernels.hpp"

#include <limits>

#include <fmt/format.h>

#include "treebary/barycenter.hpp"
#include "treebary/error.hpp"
#include "treebary/parallel.hpp"

namespace treebary::kernels {

namespace {

void map_one(const Tree& tree, const DiscreteMeasure& mu, std::size_t column, EdgeMajor& out) {
  const auto z = tree_map(tree, mu);
  const auto values = z.values();
  for (std::size_t e = 0; e < out.edges; ++e) {
    out.data[e * out.inputs + column] = values[e];
  }
}

EdgeMajor make_edge_major(const Tree& tree, std::size_t inputs) {
  EdgeMajor z;
  z.edges = tree.edge_count();
  z.inputs = inputs;
  z.data.assign(z.edges * z.inputs, 0.0);
  return z;
}

void check_median_weights(const EdgeMajor& z, std::span<const double> weights) {
  require(weights.size() == z.inputs, ErrorKind::Domain,
          fmt::format("{} weights for {} inputs", weights.size(), z.inputs));
}

std::size_t nearest(const Tree& tree, NodeId point, std::span<const NodeId> centers) {
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = tree.distance(point, centers[c]);
    if (d < best_distance) {
      best_distance = d;
      best = c;
    }
  }
  return best;
}

void check_square(std::span<const EdgeVector> rows, std::span<const EdgeVector> cols) {
  for (const auto& r : rows) {
    for (const auto& c : cols) {
      require(r.size() == c.size(), ErrorKind::Structural,
              "distance matrix over edge vectors of different trees");
    }
  }
}

}  // namespace

EdgeMajor tree_map_batch(const Tree& tree, std::span<const DiscreteMeasure> measures) {
  auto z = make_edge_major(tree, measures.size());
  parallel_for(measures.size(), [&](std::size_t i) { map_one(tree, measures[i], i, z); });
  return z;
}

EdgeMajor tree_map_batch_serial(const Tree& tree, std::span<const DiscreteMeasure> measures) {
  auto z = make_edge_major(tree, measures.size());
  for (std::size_t i = 0; i < measures.size(); ++i) {
    map_one(tree, measures[i], i, z);
  }
  return z;
}

std::vector<double> edge_medians(const EdgeMajor& z, std::span<const double> weights) {
  check_median_weights(z, weights);
  std::vector<double> out(z.edges);
#pragma omp parallel
  {
    std::vector<std::size_t> order;
#pragma omp for schedule(static)
    for (long long e = 0; e < static_cast<long long>(z.edges); ++e) {
      const auto row = z.row(static_cast<std::size_t>(e));
      out[static_cast<std::size_t>(e)] = detail::weighted_median_unchecked(row, weights, order);
    }
  }
  return out;
}

std::vector<double> edge_medians_serial(const EdgeMajor& z, std::span<const double> weights) {
  check_median_weights(z, weights);
  std::vector<double> out(z.edges);
  std::vector<std::size_t> order;
  for (std::size_t e = 0; e < z.edges; ++e) {
    out[e] = detail::weighted_median_unchecked(z.row(e), weights, order);
  }
  return out;
}

std::vector<std::size_t> nearest_centers(const Tree& tree, std::span<const NodeId> points,
                                         std::span<const NodeId> centers) {
  require(!centers.empty(), ErrorKind::Domain, "no centers to assign to");
  std::vector<std::size_t> out(points.size());
  parallel_for(points.size(), [&](std::size_t j) { out[j] = nearest(tree, points[j], centers); });
  return out;
}

std::vector<std::size_t> nearest_centers_serial(const Tree& tree, std::span<const NodeId> points,
                                                std::span<const NodeId> centers) {
  require(!centers.empty(), ErrorKind::Domain, "no centers to assign to");
  std::vector<std::size_t> out(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    out[j] = nearest(tree, points[j], centers);
  }
  return out;
}

std::vector<double> distance_matrix(std::span<const EdgeVector> rows,
                                    std::span<const EdgeVector> cols) {
  check_square(rows, cols);
  std::vector<double> out(rows.size() * cols.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out[i * cols.size() + j] = l1_distance(rows[i], cols[j]);
    }
  });
  return out;
}

std::vector<double> distance_matrix_serial(std::span<const EdgeVector> rows,
                                           std::span<const EdgeVector> cols) {
  check_square(rows, cols);
  std::vector<double> out(rows.size() * cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out[i * cols.size() + j] = l1_distance(rows[i], cols[j]);
    }
  }
  return out;
}

std::vector<NodeId> attach_points(const Tree& tree, const PointCloud& points) {
  std::vector<NodeId> out(points.size());
  parallel_for(points.size(), [&](std::size_t i) { out[i] = attach_point(tree, points[i]); });
  return out;
}

std::vector<NodeId> attach_points_serial(const Tree& tree, const PointCloud& points) {
  std::vector<NodeId> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i] = attach_point(tree, points[i]);
  }
  return out;
}

}  // namespace treebary::kernels
