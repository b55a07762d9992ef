#include "treebary/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "treebary/error.hpp"

namespace treebary {

PointCloud::PointCloud(std::size_t dim, std::vector<double> data)
    : dim_(dim), data_(std::move(data)) {
  require(dim_ > 0 || data_.empty(), ErrorKind::Domain, "point dimension must be positive");
  require(dim_ == 0 || data_.size() % dim_ == 0, ErrorKind::Domain,
          fmt::format("{} coordinates do not split into rows of {}", data_.size(), dim_));
}

PointCloud::PointCloud(const std::vector<std::vector<double>>& rows) {
  for (const auto& row : rows) {
    push_back(row);
  }
}

void PointCloud::push_back(std::span<const double> point) {
  if (dim_ == 0) {
    require(!point.empty(), ErrorKind::Domain, "points must have at least one coordinate");
    dim_ = point.size();
  }
  require(point.size() == dim_, ErrorKind::Domain,
          fmt::format("point has dimension {}, expected {}", point.size(), dim_));
  data_.insert(data_.end(), point.begin(), point.end());
}

void PointCloud::append(const PointCloud& other) {
  for (std::size_t i = 0; i < other.size(); ++i) {
    push_back(other[i]);
  }
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double total = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    total += diff * diff;
  }
  return total;
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(squared_distance(a, b));
}

std::vector<double> centroid(const PointCloud& points) {
  require(!points.empty(), ErrorKind::Domain, "centroid of an empty point set");
  std::vector<double> mean(points.dim(), 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto row = points[i];
    for (std::size_t k = 0; k < mean.size(); ++k) {
      mean[k] += row[k];
    }
  }
  for (auto& x : mean) {
    x /= static_cast<double>(points.size());
  }
  return mean;
}

DiscreteMeasure::DiscreteMeasure(std::vector<NodeId> supports, std::vector<double> weights) {
  require(supports.size() == weights.size(), ErrorKind::Domain,
          fmt::format("{} supports but {} weights", supports.size(), weights.size()));
  std::vector<std::size_t> order(supports.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return supports[a] < supports[b]; });

  double total = 0.0;
  for (const std::size_t i : order) {
    const double w = weights[i];
    require(std::isfinite(w) && w >= 0.0, ErrorKind::Domain,
            fmt::format("invalid weight {} at node {}", w, supports[i].value));
    if (w == 0.0) {
      continue;
    }
    if (!supports_.empty() && supports_.back() == supports[i]) {
      weights_.back() += w;
    } else {
      supports_.push_back(supports[i]);
      weights_.push_back(w);
    }
    total += w;
  }
  require(total > 0.0, ErrorKind::Domain, "measure has no positive mass");
  for (auto& w : weights_) {
    w /= total;
  }
}

DiscreteMeasure DiscreteMeasure::dirac(NodeId node) { return DiscreteMeasure({node}, {1.0}); }

double DiscreteMeasure::weight_at(NodeId node) const {
  const auto it = std::lower_bound(supports_.begin(), supports_.end(), node);
  if (it == supports_.end() || *it != node) {
    return 0.0;
  }
  return weights_[static_cast<std::size_t>(it - supports_.begin())];
}

void DiscreteMeasure::check_on(const Tree& tree) const {
  if (!supports_.empty()) {
    require(supports_.back().index() < tree.node_count(), ErrorKind::Structural,
            fmt::format("measure support {} is not a node of a {}-node tree",
                        supports_.back().value, tree.node_count()));
  }
}

WeightedMeasureSet::WeightedMeasureSet(std::vector<DiscreteMeasure> measures,
                                       std::vector<double> mixture_weights)
    : measures_(std::move(measures)), mixture_weights_(std::move(mixture_weights)) {
  require(!measures_.empty(), ErrorKind::Domain, "measure set is empty");
  require(measures_.size() == mixture_weights_.size(), ErrorKind::Domain,
          fmt::format("{} measures but {} mixture weights", measures_.size(),
                      mixture_weights_.size()));
  double total = 0.0;
  for (const double p : mixture_weights_) {
    require(std::isfinite(p) && p >= 0.0, ErrorKind::Domain,
            fmt::format("invalid mixture weight {}", p));
    total += p;
  }
  require(std::abs(total - 1.0) <= kMassTolerance, ErrorKind::Domain,
          fmt::format("mixture weights sum to {:.17g}, expected 1", total));
}

WeightedMeasureSet WeightedMeasureSet::uniform(std::vector<DiscreteMeasure> measures) {
  const auto n = measures.size();
  require(n > 0, ErrorKind::Domain, "measure set is empty");
  return WeightedMeasureSet(std::move(measures),
                            std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

NodeId attach_point(const Tree& tree, std::span<const double> x) {
  require(tree.has_embeddings(), ErrorKind::Unsupported,
          "attaching points needs a tree with node embeddings");
  require(x.size() == tree.dim(), ErrorKind::Domain,
          fmt::format("point has dimension {}, tree embeddings have {}", x.size(), tree.dim()));
  NodeId node = tree.root();
  for (auto kids = tree.children(node); !kids.empty(); kids = tree.children(node)) {
    double best = std::numeric_limits<double>::infinity();
    for (const NodeId c : kids) {
      const double d = squared_distance(tree.embedding(c), x);
      if (d < best) {
        best = d;
        node = c;
      }
    }
  }
  return node;
}

DiscreteMeasure from_points(const Tree& tree, const PointCloud& points,
                            std::span<const double> masses) {
  require(!points.empty(), ErrorKind::Domain, "cannot build a measure from zero points");
  require(tree.has_embeddings(), ErrorKind::Unsupported,
          "attaching points needs a tree with node embeddings");
  require(masses.size() == points.size(), ErrorKind::Domain,
          fmt::format("{} points but {} masses", points.size(), masses.size()));
  std::vector<NodeId> supports(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    supports[i] = attach_point(tree, points[i]);
  }
  return DiscreteMeasure(std::move(supports), std::vector<double>(masses.begin(), masses.end()));
}

DiscreteMeasure uniform_empirical(const Tree& tree, const PointCloud& points) {
  const std::vector<double> masses(points.size(), 1.0);
  return from_points(tree, points, masses);
}

}  // namespace treebary
