#pragma once

// Data-parallel kernels. Each OpenMP kernel has a `_serial` twin kept as the
// reference implementation for tests and benchmarks; both produce identical
// results independent of the thread count.

#include <cstddef>
#include <span>
#include <vector>

#include "treebary/measure.hpp"
#include "treebary/points.hpp"
#include "treebary/tree.hpp"
#include "treebary/tw_distance.hpp"

namespace treebary::kernels {

// Tree mappings of n measures in edge-major layout: row e holds coordinate e
// of every input.
struct EdgeMajor {
  std::size_t edges = 0;
  std::size_t inputs = 0;
  std::vector<double> data;

  std::span<const double> row(std::size_t e) const {
    return std::span<const double>(data).subspan(e * inputs, inputs);
  }
};

EdgeMajor tree_map_batch(const Tree& tree, std::span<const DiscreteMeasure> measures);
EdgeMajor tree_map_batch_serial(const Tree& tree, std::span<const DiscreteMeasure> measures);

std::vector<double> edge_medians(const EdgeMajor& z, std::span<const double> weights);
std::vector<double> edge_medians_serial(const EdgeMajor& z, std::span<const double> weights);

// Index of the nearest center under the tree metric, ties to the lowest index.
std::vector<std::size_t> nearest_centers(const Tree& tree, std::span<const NodeId> points,
                                         std::span<const NodeId> centers);
std::vector<std::size_t> nearest_centers_serial(const Tree& tree, std::span<const NodeId> points,
                                                std::span<const NodeId> centers);

// rows.size() x cols.size() matrix of l1 distances between tree mappings.
std::vector<double> distance_matrix(std::span<const EdgeVector> rows,
                                    std::span<const EdgeVector> cols);
std::vector<double> distance_matrix_serial(std::span<const EdgeVector> rows,
                                           std::span<const EdgeVector> cols);

std::vector<NodeId> attach_points(const Tree& tree, const PointCloud& points);
std::vector<NodeId> attach_points_serial(const Tree& tree, const PointCloud& points);

}  // namespace treebary::kernels
