#include <filesystem>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "treebary/error.hpp"
#include "treebary/io.hpp"

using namespace treebary;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "treebary_io_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("doubles round-trip through 17 digits") {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) / 3.0;
    CHECK(std::stod(io::format_double(x)) == x);
  }
  CHECK_THROWS_AS(io::format_double(std::nan("")), Error);
  const io::Json j = {{"b", 0.1}, {"a", 1}};
  CHECK(io::dump(j, -1) == R"({"a":1,"b":0.10000000000000001})");
}

TEST_CASE("tree JSON round trip") {
  std::mt19937_64 rng(62);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = oracle::random_tree(rng, 1 + trial * 3);
    const auto back = io::tree_from_json(io::parse_json(io::dump(io::tree_to_json(t)), "test"));
    REQUIRE(back.node_count() == t.node_count());
    CHECK(back.root() == t.root());
    for (std::size_t v = 0; v < t.node_count(); ++v) {
      CHECK(back.parent(NodeId(v)) == t.parent(NodeId(v)));
    }
    CHECK(std::equal(back.edge_weights().begin(), back.edge_weights().end(),
                     t.edge_weights().begin(), t.edge_weights().end()));
  }
}

TEST_CASE("bad JSON is a parse error") {
  try {
    io::parse_json("{\"root\": ", "x.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
  }
}

TEST_CASE("CSV reading") {
  const auto path = scratch("points.csv");
  io::write_file(path, "x,y\n# comment\n1,2\n\n3.5,-4\n");
  const auto p = io::read_points_csv(path);
  REQUIRE(p.size() == 2);
  CHECK(p[1][0] == 3.5);
  CHECK(p[1][1] == -4.0);

  const auto bad = scratch("bad.csv");
  io::write_file(bad, "1,2\n3,oops\n");
  try {
    io::read_points_csv(bad);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }

  const auto ragged = scratch("ragged.csv");
  io::write_file(ragged, "1,2\n3\n");
  CHECK_THROWS_AS(io::read_points_csv(ragged), Error);

  const auto measure = scratch("measure.csv");
  io::write_file(measure, "node_id,weight\n2,1\n0,3\n");
  const auto mu = io::read_measure_csv(measure);
  CHECK(mu.weight_at(NodeId(0)) == 0.75);
}

TEST_CASE("hashes are stable") {
  CHECK(io::fnv1a("") == 0xcbf29ce484222325ull);
  CHECK(io::fnv1a("a") == 0xaf63dc4c8601ec8cull);
  CHECK(io::hash_hex("a") == "af63dc4c8601ec8c");
}
