// Serial vs OpenMP timings for the data-parallel kernels.
// Usage: bench_kernels [repeats]

#include <chrono>
#include <cstdlib>
#include <random>

#include <fmt/format.h>

#include "treebary/kernels.hpp"
#include "treebary/parallel.hpp"
#include "treebary/synthetic.hpp"
#include "treebary/tree_sampling.hpp"

using namespace treebary;

namespace {

template <typename F>
double best_of(int repeats, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    f();
    best = std::min(best,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel) {
  fmt::print("{:<18} serial {:>9.4f}s  parallel {:>9.4f}s  speedup {:>5.2f}\n", name, serial,
             parallel, serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::atoi(argv[1]) : 5;
  fmt::print("threads: {}\n", thread_count());

  const auto clouds = gaussian_clouds(500, 100, 2, 10.0, 1);
  PointCloud pooled;
  for (const auto& c : clouds) {
    pooled.append(c);
  }
  const auto tree = sample_tree(pooled, SamplingConfig{}, 1).tree;
  std::vector<DiscreteMeasure> measures;
  for (const auto& c : clouds) {
    measures.push_back(uniform_empirical(tree, c));
  }

  report("attach_points", best_of(repeats, [&] { kernels::attach_points_serial(tree, pooled); }),
         best_of(repeats, [&] { kernels::attach_points(tree, pooled); }));

  const auto z = kernels::tree_map_batch(tree, measures);
  report("tree_map_batch",
         best_of(repeats, [&] { kernels::tree_map_batch_serial(tree, measures); }),
         best_of(repeats, [&] { kernels::tree_map_batch(tree, measures); }));

  const std::vector<double> p(measures.size(), 1.0 / static_cast<double>(measures.size()));
  report("edge_medians", best_of(repeats, [&] { kernels::edge_medians_serial(z, p); }),
         best_of(repeats, [&] { kernels::edge_medians(z, p); }));

  std::vector<EdgeVector> maps;
  for (const auto& mu : measures) {
    maps.push_back(tree_map(tree, mu));
  }
  report("distance_matrix", best_of(repeats, [&] { kernels::distance_matrix_serial(maps, maps); }),
         best_of(repeats, [&] { kernels::distance_matrix(maps, maps); }));

  std::mt19937_64 rng(2);
  std::uniform_int_distribution<std::size_t> pick(0, tree.node_count() - 1);
  std::vector<NodeId> points(20000), centers(16);
  for (auto& v : points) {
    v = NodeId(pick(rng));
  }
  for (auto& v : centers) {
    v = NodeId(pick(rng));
  }
  report("nearest_centers",
         best_of(repeats, [&] { kernels::nearest_centers_serial(tree, points, centers); }),
         best_of(repeats, [&] { kernels::nearest_centers(tree, points, centers); }));
  return 0;
}
