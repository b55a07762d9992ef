#include "doctest.h"
#include "fixtures.hpp"
#include "treebary/error.hpp"
#include "treebary/measure.hpp"

using namespace treebary;
using Rows = std::vector<std::vector<double>>;

namespace {

// root (0,0); leaves at (-1,0), (1,0), (0,2)
Tree embedded_star() {
  return Tree(NodeId(0), {std::nullopt, NodeId(0), NodeId(0), NodeId(0)}, {0, 1, 1, 2},
              {{0, 0}, {-1, 0}, {1, 0}, {0, 2}});
}

}  // namespace

TEST_CASE("construction normalizes, merges and drops zeros") {
  const DiscreteMeasure mu({NodeId(2), NodeId(1), NodeId(2), NodeId(3)}, {1, 1, 2, 0});
  REQUIRE(mu.size() == 2);
  CHECK(mu.supports()[0] == NodeId(1));
  CHECK(mu.supports()[1] == NodeId(2));
  CHECK(mu.weights()[0] == doctest::Approx(0.25));
  CHECK(mu.weights()[1] == doctest::Approx(0.75));
  CHECK_THROWS_AS(DiscreteMeasure({NodeId(0)}, {-1.0}), Error);
  CHECK_THROWS_AS(DiscreteMeasure({NodeId(0)}, {0.0}), Error);
  CHECK_THROWS_AS(DiscreteMeasure({NodeId(0)}, {1.0, 2.0}), Error);
}

TEST_CASE("mixture weights must sum to one") {
  const auto d = DiscreteMeasure::dirac(NodeId(0));
  CHECK_NOTHROW(WeightedMeasureSet({d, d}, {0.5, 0.5}));
  CHECK_THROWS_AS(WeightedMeasureSet({d, d}, {0.5, 0.6}), Error);
  CHECK_THROWS_AS(WeightedMeasureSet({}, {}), Error);
}

TEST_CASE("from_points attaches by greedy descent") {
  const auto t = embedded_star();
  const PointCloud one(Rows{{1.0, 0.0}});
  CHECK(uniform_empirical(t, one) == DiscreteMeasure::dirac(NodeId(2)));

  const PointCloud same(Rows{{0.9, 0.1}, {1.1, 0.0}});
  const std::vector<double> unit{1.0, 1.0};
  const auto merged = from_points(t, same, unit);
  CHECK(merged.size() == 1);
  CHECK(merged.weights()[0] == 1.0);

  const PointCloud three(Rows{{-1, 0}, {1, 0}, {0, 2}});
  const std::vector<double> masses{1, 1, 2};
  const auto mu = from_points(t, three, masses);
  REQUIRE(mu.size() == 3);
  CHECK(mu.weight_at(NodeId(1)) == doctest::Approx(0.25));
  CHECK(mu.weight_at(NodeId(2)) == doctest::Approx(0.25));
  CHECK(mu.weight_at(NodeId(3)) == doctest::Approx(0.5));

  const PointCloud aab(Rows{{-1, 0}, {-1, 0}, {1, 0}});
  const auto e = uniform_empirical(t, aab);
  CHECK(e.weight_at(NodeId(1)) == doctest::Approx(2.0 / 3.0));
  CHECK(e.weight_at(NodeId(2)) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("attachment errors") {
  const auto bare = fixtures::chain();
  const PointCloud p(Rows{{0.0}});
  try {
    uniform_empirical(bare, p);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Unsupported);
  }
  try {
    uniform_empirical(embedded_star(), PointCloud{});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Domain);
  }
}

TEST_CASE("ties in attachment go to the lower child id") {
  const auto t = embedded_star();
  CHECK(attach_point(t, std::vector<double>{0.0, 0.0}) == NodeId(1));
}

TEST_CASE("rebuilding from supports and weights is idempotent") {
  const DiscreteMeasure mu({NodeId(3), NodeId(1)}, {0.3, 0.7});
  const std::vector<NodeId> s(mu.supports().begin(), mu.supports().end());
  const std::vector<double> w(mu.weights().begin(), mu.weights().end());
  CHECK(DiscreteMeasure(s, w) == mu);

  const auto t = embedded_star();
  PointCloud pts;
  for (const NodeId v : mu.supports()) {
    pts.push_back(t.embedding(v));
  }
  CHECK(from_points(t, pts, w) == mu);
}
