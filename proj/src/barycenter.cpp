#include "treebary/barycenter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include <fmt/format.h>

#include "treebary/error.hpp"
#include "treebary/kernels.hpp"
#include "treebary/parallel.hpp"

namespace treebary {

namespace detail {

double weighted_median_unchecked(std::span<const double> values, std::span<const double> weights,
                                 std::vector<std::size_t>& order) {
  const std::size_t n = values.size();
  order.resize(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  if (weights[order.front()] >= 0.5) {
    return values[order.front()];
  }
  if (weights[order.back()] >= 0.5) {
    return values[order.back()];
  }
  double below = weights[order.front()];
  for (std::size_t t = 1; t < n; ++t) {
    const double w = weights[order[t]];
    if (1.0 - below - w <= 0.5) {
      return values[order[t]];
    }
    below += w;
  }
  // Only reachable when rounding leaves the weights summing slightly below 1.
  return values[order.back()];
}

}  // namespace detail

double weighted_median(std::span<const double> values, std::span<const double> weights) {
  require(!values.empty(), ErrorKind::Domain, "weighted median of an empty set");
  require(values.size() == weights.size(), ErrorKind::Domain,
          fmt::format("{} values but {} weights", values.size(), weights.size()));
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(std::isfinite(values[i]), ErrorKind::Domain, "weighted median of a non-finite value");
    require(std::isfinite(weights[i]) && weights[i] >= 0.0, ErrorKind::Domain,
            fmt::format("invalid median weight {}", weights[i]));
    total += weights[i];
  }
  require(std::abs(total - 1.0) <= kMassTolerance, ErrorKind::Domain,
          fmt::format("median weights sum to {:.17g}, expected 1", total));
  std::vector<std::size_t> order;
  return detail::weighted_median_unchecked(values, weights, order);
}

double barycenter_objective(const Tree& tree, const DiscreteMeasure& candidate,
                            const WeightedMeasureSet& set) {
  const auto z = tree_map(tree, candidate);
  const auto p = set.mixture_weights();
  double total = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    total += p[i] * l1_distance(z, tree_map(tree, set[i]));
  }
  return total;
}

namespace {

void check_set_on(const Tree& tree, const WeightedMeasureSet& set) {
  for (const auto& mu : set.measures()) {
    mu.check_on(tree);
  }
}

// Convex piecewise-linear function on [0, 1]: knots run from 0 to exactly 1
// and slopes[k] applies on [knots[k], knots[k + 1]].
struct ConvexPiecewise {
  double at_zero = 0.0;
  std::vector<double> knots{0.0};
  std::vector<double> slopes;
};

struct Piece {
  double slope;
  double length;
  std::size_t owner;
};

// t -> w * sum_i p_i |t - s_i| on [0, 1].
ConvexPiecewise edge_cost(double w, std::span<const double> s, std::span<const double> p) {
  ConvexPiecewise f;
  std::vector<std::pair<double, double>> points;
  points.reserve(s.size());
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double si = std::clamp(s[i], 0.0, 1.0);
    points.emplace_back(si, p[i]);
    f.at_zero += w * p[i] * si;
    total += p[i];
  }
  std::sort(points.begin(), points.end());
  double slope = -w * total;
  double pos = 0.0;
  for (const auto& [si, pi] : points) {
    if (si > pos) {
      f.knots.push_back(si);
      f.slopes.push_back(slope);
      pos = si;
    }
    slope += 2.0 * w * pi;
  }
  if (pos < 1.0) {
    f.knots.push_back(1.0);
    f.slopes.push_back(slope);
  }
  return f;
}

std::vector<Piece> collect_pieces(const Tree& tree, NodeId v,
                                  const std::vector<ConvexPiecewise>& below) {
  std::vector<Piece> pieces;
  for (const NodeId c : tree.children(v)) {
    const auto& f = below[c.index()];
    for (std::size_t k = 0; k < f.slopes.size(); ++k) {
      pieces.push_back({f.slopes[k], f.knots[k + 1] - f.knots[k], c.index()});
    }
  }
  std::stable_sort(pieces.begin(), pieces.end(),
                   [](const Piece& a, const Piece& b) { return a.slope < b.slope; });
  return pieces;
}

// t -> min { sum_c F_c(t_c) : t_c >= 0, sum_c t_c <= t } on [0, 1].
ConvexPiecewise children_envelope(const Tree& tree, NodeId v,
                                  const std::vector<ConvexPiecewise>& below) {
  ConvexPiecewise h;
  for (const NodeId c : tree.children(v)) {
    h.at_zero += below[c.index()].at_zero;
  }
  double pos = 0.0;
  for (const auto& piece : collect_pieces(tree, v, below)) {
    if (piece.slope >= 0.0 || pos >= 1.0) {
      break;
    }
    const double next = std::min(1.0, pos + piece.length);
    if (next > pos) {
      h.knots.push_back(next);
      h.slopes.push_back(piece.slope);
      pos = next;
    }
  }
  if (pos < 1.0) {
    h.knots.push_back(1.0);
    h.slopes.push_back(0.0);
  }
  return h;
}

ConvexPiecewise add(const ConvexPiecewise& f, const ConvexPiecewise& g) {
  ConvexPiecewise sum;
  sum.at_zero = f.at_zero + g.at_zero;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < f.slopes.size() && j < g.slopes.size()) {
    const double end = std::min(f.knots[i + 1], g.knots[j + 1]);
    sum.knots.push_back(end);
    sum.slopes.push_back(f.slopes[i] + g.slopes[j]);
    if (f.knots[i + 1] == end) {
      ++i;
    }
    if (g.knots[j + 1] == end) {
      ++j;
    }
  }
  return sum;
}

}  // namespace

BarycenterResult exact_tw_barycenter(const Tree& tree, const WeightedMeasureSet& set) {
  check_set_on(tree, set);
  const std::size_t n = set.size();
  const std::size_t nodes = tree.node_count();
  const auto p = set.mixture_weights();

  // masses[v * n + i] = mu_i(Gamma(v))
  std::vector<double> masses(nodes * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto m = subtree_masses(tree, set[i]);
    for (std::size_t v = 0; v < nodes; ++v) {
      masses[v * n + i] = m[v];
    }
  }

  // F_v(t): optimal cost of the edges in and above the subtree of v given
  // subtree mass t. Computed children first.
  std::vector<ConvexPiecewise> below(nodes);
  const auto order = tree.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId v = *it;
    if (v == tree.root()) {
      continue;
    }
    const double w = tree.weight(tree.edge_above(v));
    const auto s = std::span<const double>(masses).subspan(v.index() * n, n);
    below[v.index()] = add(edge_cost(w, s, p), children_envelope(tree, v, below));
  }

  // Top-down: split each node's subtree mass among its children by taking
  // the cheapest negative-slope pieces first.
  std::vector<double> mass(nodes, 0.0);
  mass[tree.root().index()] = 1.0;
  for (const NodeId v : order) {
    double remaining = mass[v.index()];
    for (const auto& piece : collect_pieces(tree, v, below)) {
      if (piece.slope >= 0.0 || remaining <= 0.0) {
        break;
      }
      const double take = std::min(piece.length, remaining);
      mass[piece.owner] += take;
      remaining -= take;
    }
  }

  std::vector<NodeId> supports;
  std::vector<double> weights;
  for (std::size_t v = 0; v < nodes; ++v) {
    double a = mass[v];
    for (const NodeId c : tree.children(NodeId(v))) {
      a -= mass[c.index()];
    }
    if (a > 0.0) {
      supports.emplace_back(v);
      weights.push_back(a);
    }
  }
  DiscreteMeasure barycenter(std::move(supports), std::move(weights));
  auto z = tree_map(tree, barycenter);
  const double objective = barycenter_objective(tree, barycenter, set);
  return BarycenterResult{std::move(barycenter), objective, std::move(z), objective, true, 0.0};
}

BarycenterResult tw_barycenter(const Tree& tree, const WeightedMeasureSet& set,
                               BarycenterOptions options) {
  check_set_on(tree, set);
  const auto p = set.mixture_weights();
  const auto z = kernels::tree_map_batch(tree, set.measures());
  auto medians = kernels::edge_medians(z, p);

  double lower_bound = 0.0;
  for (std::size_t e = 0; e < z.edges; ++e) {
    const auto row = z.row(e);
    double cost = 0.0;
    for (std::size_t i = 0; i < z.inputs; ++i) {
      cost += p[i] * std::abs(medians[e] - row[i]);
    }
    lower_bound += cost;
  }

  EdgeVector zbar(tree, std::move(medians));
  const auto recovered = recover_node_weights(zbar);
  const auto worst = std::min_element(recovered.begin(), recovered.end());
  const double min_weight = *worst;

  if (min_weight >= -kMassTolerance) {
    auto barycenter = inverse_map(zbar);
    const double objective = barycenter_objective(tree, barycenter, set);
    return BarycenterResult{std::move(barycenter), objective, std::move(zbar), lower_bound, true,
                            min_weight};
  }

  if (options.strict) {
    fail(ErrorKind::Internal,
         fmt::format("coordinate-wise median is not the tree mapping of a measure: weight "
                     "{:.17g} at node {} ({} inputs, {} edges)",
                     min_weight, worst - recovered.begin(), set.size(), tree.edge_count()));
  }
  auto exact = exact_tw_barycenter(tree, set);
  exact.lower_bound = lower_bound;
  exact.median_feasible = false;
  exact.min_recovered_weight = min_weight;
  return exact;
}

EnsembleBarycenter ensemble_barycenter(std::span<const Tree> trees,
                                       std::span<const WeightedMeasureSet> sets,
                                       const BarycenterSolver& solver) {
  require(!trees.empty(), ErrorKind::Domain, "ensemble is empty");
  require(trees.size() == sets.size(), ErrorKind::Domain,
          fmt::format("{} trees but {} measure sets", trees.size(), sets.size()));
  const auto p0 = sets.front().mixture_weights();
  for (const auto& set : sets) {
    require(std::equal(p0.begin(), p0.end(), set.mixture_weights().begin(),
                       set.mixture_weights().end()),
            ErrorKind::Domain, "mixture weights differ across trees");
  }

  std::vector<std::optional<BarycenterResult>> slots(trees.size());
  parallel_for(trees.size(), [&](std::size_t t) {
    slots[t] = solver ? solver(trees[t], sets[t], t) : tw_barycenter(trees[t], sets[t]);
  });
  EnsembleBarycenter out;
  out.mixture_coefficient = 1.0 / static_cast<double>(trees.size());
  out.per_tree.reserve(trees.size());
  for (auto& slot : slots) {
    out.per_tree.push_back(std::move(*slot));
  }
  return out;
}

}  // namespace treebary
