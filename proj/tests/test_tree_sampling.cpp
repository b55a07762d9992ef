#include <functional>
#include <random>

#include "doctest.h"
#include "treebary/error.hpp"
#include "treebary/tree_sampling.hpp"

using namespace treebary;
using Rows = std::vector<std::vector<double>>;

namespace {

PointCloud random_cloud(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> data(n * dim);
  for (auto& x : data) {
    x = g(rng);
  }
  return PointCloud(dim, std::move(data));
}

// Discrete optimal k-center radius by enumerating center subsets.
double optimal_radius(const PointCloud& p, std::size_t k) {
  const std::size_t n = p.size();
  double best = 1e300;
  std::vector<std::size_t> idx(k);
  auto eval = [&] {
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double near = 1e300;
      for (const std::size_t c : idx) {
        near = std::min(near, euclidean_distance(p[i], p[c]));
      }
      r = std::max(r, near);
    }
    best = std::min(best, r);
  };
  // k <= 3: nested loops via recursion
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t from) {
    if (pos == k) {
      eval();
      return;
    }
    for (std::size_t i = from; i < n; ++i) {
      idx[pos] = i;
      rec(pos + 1, i + 1);
    }
  };
  rec(0, 0);
  return best;
}

}  // namespace

TEST_CASE("farthest-point clustering basics") {
  std::mt19937_64 rng(41);
  const auto p = random_cloud(rng, 20, 2);
  const auto one = farthest_point_clustering(p, 1, 0);
  CHECK(one.centers.size() == 1);
  for (const auto a : one.assignment) {
    CHECK(a == 0);
  }
  const auto all = farthest_point_clustering(p, 20, 0);
  CHECK(all.centers.size() == 20);
  CHECK(all.radius == 0.0);
  const auto more = farthest_point_clustering(p, 50, 0);
  CHECK(more.centers.size() == 20);
  CHECK_THROWS_AS(farthest_point_clustering(PointCloud{}, 2, 0), Error);
}

TEST_CASE("farthest-point clustering separates two blobs") {
  std::mt19937_64 rng(42);
  auto a = random_cloud(rng, 30, 2);
  PointCloud both;
  for (std::size_t i = 0; i < a.size(); ++i) {
    both.push_back(a[i]);
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::vector<double> shifted{a[i][0] + 100.0, a[i][1]};
    both.push_back(shifted);
  }
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto c = farthest_point_clustering(both, 2, seed);
    for (std::size_t i = 0; i < both.size(); ++i) {
      CHECK(c.assignment[i] == c.assignment[i < 30 ? 0 : 30]);
      // nearest-center check
      const double own = euclidean_distance(both[i], both[c.centers[c.assignment[i]]]);
      for (const auto cc : c.centers) {
        CHECK(own <= euclidean_distance(both[i], both[cc]));
      }
    }
    CHECK(c.assignment[0] != c.assignment[30]);
  }
}

TEST_CASE("farthest-point radius is within twice the optimum") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 60; ++trial) {
    const auto p = random_cloud(rng, 4 + trial % 9, 2);
    for (std::size_t k = 1; k <= 3; ++k) {
      const auto c = farthest_point_clustering(p, k, trial);
      CHECK(c.radius <= 2.0 * optimal_radius(p, k) + 1e-12);
    }
  }
}

TEST_CASE("sample_tree small cases") {
  SamplingConfig cfg;
  cfg.kappa = 2;
  cfg.depth = 2;
  const PointCloud two(Rows{{0.0, 0.0}, {4.0, 0.0}});
  const auto s = sample_tree(two, cfg, 0);
  REQUIRE(s.tree.node_count() == 3);
  CHECK(s.tree.weight(EdgeId(0)) == doctest::Approx(2.0));
  CHECK(s.tree.weight(EdgeId(1)) == doctest::Approx(2.0));
  CHECK(s.point_paths[0] != s.point_paths[1]);
  CHECK(s.tree.embedding(s.tree.root())[0] == 2.0);

  const PointCloud single(Rows{{1.0, 2.0}});
  const auto r = sample_tree(single, SamplingConfig{}, 0);
  CHECK(r.tree.node_count() == 1);
  CHECK(r.point_paths[0] == r.tree.root());
}

TEST_CASE("config validation") {
  SamplingConfig bad;
  bad.kappa = 1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = SamplingConfig{};
  bad.depth = 1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = SamplingConfig{};
  bad.min_edge_weight = 0.0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("sampled trees respect the branching bound and cover every point") {
  std::mt19937_64 rng(44);
  const auto p = random_cloud(rng, 1000, 3);
  SamplingConfig cfg;
  cfg.num_trees = 10;
  cfg.seed = 5;
  const auto ens = sample_ensemble(p, cfg);
  REQUIRE(ens.size() == 10);
  std::size_t bound = 1;
  for (int l = 1, pow4 = 4; l <= 5; ++l, pow4 *= 4) {
    bound += pow4;
  }
  for (std::size_t t = 0; t < ens.size(); ++t) {
    const auto& tree = ens.trees[t];
    CHECK(tree.node_count() <= bound);
    REQUIRE(ens.point_paths[t].size() == p.size());
    for (const NodeId leaf : ens.point_paths[t]) {
      CHECK(tree.depth(leaf) <= cfg.depth);
    }
    for (std::size_t e = 0; e < tree.edge_count(); ++e) {
      CHECK(tree.weight(EdgeId(e)) >= cfg.min_edge_weight);
    }
    // level partition: each point's ancestor at every level is unique by construction;
    // every node owns at least one point below it
    std::vector<int> owned(tree.node_count(), 0);
    for (const NodeId leaf : ens.point_paths[t]) {
      for (std::optional<NodeId> v = leaf; v; v = tree.parent(*v)) {
        ++owned[v->index()];
      }
    }
    for (std::size_t v = 0; v < tree.node_count(); ++v) {
      CHECK(owned[v] > 0);
      int child_sum = 0;
      for (const NodeId c : tree.children(NodeId(v))) {
        child_sum += owned[c.index()];
      }
      if (!tree.is_leaf(NodeId(v))) {
        CHECK(child_sum == owned[v]);
      }
    }
  }
}

TEST_CASE("ensembles are deterministic and match the serial twin") {
  std::mt19937_64 rng(45);
  const auto p = random_cloud(rng, 300, 2);
  SamplingConfig cfg;
  cfg.num_trees = 4;
  cfg.seed = 9;
  const auto a = sample_ensemble(p, cfg);
  const auto b = sample_ensemble(p, cfg);
  const auto c = sample_ensemble_serial(p, cfg);
  for (std::size_t t = 0; t < 4; ++t) {
    for (const auto* other : {&b, &c}) {
      const auto& x = a.trees[t];
      const auto& y = other->trees[t];
      REQUIRE(x.node_count() == y.node_count());
      for (std::size_t v = 0; v < x.node_count(); ++v) {
        CHECK(x.parent(NodeId(v)) == y.parent(NodeId(v)));
        const auto ex = x.embedding(NodeId(v));
        const auto ey = y.embedding(NodeId(v));
        CHECK(std::equal(ex.begin(), ex.end(), ey.begin(), ey.end()));
      }
      CHECK(std::equal(x.edge_weights().begin(), x.edge_weights().end(),
                       y.edge_weights().begin(), y.edge_weights().end()));
      CHECK(a.point_paths[t] == other->point_paths[t]);
    }
  }
  SamplingConfig one = cfg;
  one.num_trees = 1;
  CHECK(sample_ensemble(p, one).size() == 1);
}
