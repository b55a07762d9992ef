#pragma once

#include <span>
#include <utility>
#include <vector>

#include "treebary/measure.hpp"
#include "treebary/tree.hpp"

namespace treebary {

// Tree mapping h(mu): values[e] = w_e * mu(subtree below e). Holds a
// non-owning reference to its tree, which must outlive it.
class EdgeVector {
public:
  EdgeVector(const Tree& tree, std::vector<double> values);

  const Tree& tree() const { return *tree_; }
  std::size_t size() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](EdgeId e) const { return values_[e.index()]; }

private:
  const Tree* tree_;
  std::vector<double> values_;
};

// Mass of mu inside every subtree Gamma(v), indexed by node; one bottom-up pass.
std::vector<double> subtree_masses(const Tree& tree, const DiscreteMeasure& mu);

EdgeVector tree_map(const Tree& tree, const DiscreteMeasure& mu);

// Signed node weights a_x recovered from an edge vector (no validation).
// Edges with w_e = 0 and a zero value pass their children's mass through.
std::vector<double> recover_node_weights(const EdgeVector& vec);

// Inverse of tree_map. Throws Inversion when a zero-weight edge carries mass
// and NotAMeasure when a recovered weight is below -1e-9.
DiscreteMeasure inverse_map(const EdgeVector& vec);

double l1_distance(const EdgeVector& a, const EdgeVector& b);

// Closed-form tree-Wasserstein distance, sum_e w_e |mu(Gamma(v_e)) - nu(Gamma(v_e))|,
// evaluated as the l1 distance of the two tree mappings.
double tw(const Tree& tree, const DiscreteMeasure& mu, const DiscreteMeasure& nu);

using MeasurePair = std::pair<DiscreteMeasure, DiscreteMeasure>;

// Mean of per-tree TW distances, one measure pair per tree.
double tsw(std::span<const Tree> trees, std::span<const MeasurePair> pairs);

}  // namespace treebary
