#pragma once

#include <span>
#include <vector>

#include "treebary/points.hpp"
#include "treebary/tree.hpp"

namespace treebary {

inline constexpr double kMassTolerance = 1e-9;

// Probability measure supported on tree nodes. Construction merges duplicate
// supports, drops zero weights and normalizes to unit mass; supports are kept
// sorted by node id.
class DiscreteMeasure {
public:
  DiscreteMeasure(std::vector<NodeId> supports, std::vector<double> weights);

  static DiscreteMeasure dirac(NodeId node);

  std::size_t size() const { return supports_.size(); }
  std::span<const NodeId> supports() const { return supports_; }
  std::span<const double> weights() const { return weights_; }
  double weight_at(NodeId node) const;

  // Throws a structural error when a support is not a node of the tree.
  void check_on(const Tree& tree) const;

  friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;

private:
  std::vector<NodeId> supports_;
  std::vector<double> weights_;
};

// Measures sharing one tree together with mixture weights p_i (sum to 1).
class WeightedMeasureSet {
public:
  WeightedMeasureSet(std::vector<DiscreteMeasure> measures, std::vector<double> mixture_weights);

  static WeightedMeasureSet uniform(std::vector<DiscreteMeasure> measures);

  std::size_t size() const { return measures_.size(); }
  const std::vector<DiscreteMeasure>& measures() const { return measures_; }
  std::span<const double> mixture_weights() const { return mixture_weights_; }
  const DiscreteMeasure& operator[](std::size_t i) const { return measures_[i]; }

private:
  std::vector<DiscreteMeasure> measures_;
  std::vector<double> mixture_weights_;
};

// Leaf reached by greedy descent from the root, picking at each level the
// child whose embedding is Euclidean-nearest to x (ties to the lower id).
NodeId attach_point(const Tree& tree, std::span<const double> x);

DiscreteMeasure from_points(const Tree& tree, const PointCloud& points,
                            std::span<const double> masses);
DiscreteMeasure uniform_empirical(const Tree& tree, const PointCloud& points);

}  // namespace treebary
