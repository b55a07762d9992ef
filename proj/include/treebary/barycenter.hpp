#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "treebary/measure.hpp"
#include "treebary/tree.hpp"
#include "treebary/tw_distance.hpp"

namespace treebary {

// Weighted median of scalars: the sorted scan of the weighted geometric median
// algorithm. Ties between equal values keep input order, so the result is
// the first sorted value whose upper tail mass is at most one half. The
// result is always one of the inputs.
double weighted_median(std::span<const double> values, std::span<const double> weights);

namespace detail {
// As weighted_median without validation; `order` is scratch space.
double weighted_median_unchecked(std::span<const double> values, std::span<const double> weights,
                                 std::vector<std::size_t>& order);
}  // namespace detail

struct BarycenterResult {
  DiscreteMeasure barycenter;
  double objective = 0.0;  // sum_i p_i tw(barycenter, mu_i)
  EdgeVector edge_vector;  // tree mapping of the barycenter
  // Objective of the coordinate-wise median, a lower bound for every measure.
  double lower_bound = 0.0;
  // False when the coordinate-wise median was not the mapping of a measure and
  // the barycenter came from the exact tree program instead.
  bool median_feasible = true;
  // Most negative node weight recovered from the coordinate-wise median.
  double min_recovered_weight = 0.0;
};

struct BarycenterOptions {
  // Throw an internal error instead of falling back when the coordinate-wise median
  // does not invert to a probability measure.
  bool strict = false;
};

// Unconstrained TW barycenter: per-edge weighted medians of the inputs' tree
// mappings, then inverse mapping.
BarycenterResult tw_barycenter(const Tree& tree, const WeightedMeasureSet& set,
                               BarycenterOptions options = {});

// TW barycenter over node-supported probability measures solved exactly by a
// bottom-up program on convex piecewise-linear functions of subtree mass.
// Independent of the median route; used as its fallback and cross-check.
BarycenterResult exact_tw_barycenter(const Tree& tree, const WeightedMeasureSet& set);

double barycenter_objective(const Tree& tree, const DiscreteMeasure& candidate,
                            const WeightedMeasureSet& set);

using BarycenterSolver =
    std::function<BarycenterResult(const Tree&, const WeightedMeasureSet&, std::size_t tree_index)>;

// Multiple-tree variant: one barycenter per tree, averaged with coefficient 1/k.
// Components stay on their own trees.
struct EnsembleBarycenter {
  std::vector<BarycenterResult> per_tree;
  double mixture_coefficient = 1.0;  // 1/k
};

EnsembleBarycenter ensemble_barycenter(std::span<const Tree> trees,
                                       std::span<const WeightedMeasureSet> sets,
                                       const BarycenterSolver& solver = {});

}  // namespace treebary
