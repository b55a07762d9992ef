// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.
// `acceptance --probe-memory K` runs one multilevel fit and exits; the parent
// reads its peak RSS.

#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "suites.hpp"
#include "treebary/barycenter.hpp"
#include "treebary/io.hpp"
#include "treebary/metrics.hpp"
#include "treebary/multilevel.hpp"
#include "treebary/oracle.hpp"
#include "treebary/parallel.hpp"
#include "treebary/synthetic.hpp"
#include "treebary/tree_kmeans.hpp"
#include "treebary/tree_sampling.hpp"
#include "treebary/tw_distance.hpp"
#include "treebary/wasp.hpp"

using namespace treebary;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  fmt::print("[{}] {:>2} {}: {}\n", ok ? "PASS" : "FAIL", id, name, detail);
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<double> w(n);
  for (auto& x : w) {
    x = u(rng);
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) {
    x /= total;
  }
  return w;
}

WeightedMeasureSet random_set(std::mt19937_64& rng, const Tree& t, std::size_t n) {
  std::vector<DiscreteMeasure> ms;
  for (std::size_t i = 0; i < n; ++i) {
    ms.push_back(oracle::random_measure(rng, t, 10));
  }
  auto p = random_simplex(rng, n);
  p.back() = 1.0 - std::accumulate(p.begin(), p.end() - 1, 0.0);
  return WeightedMeasureSet(std::move(ms), std::move(p));
}

// ---- 1 ----
void closed_form() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<std::size_t> nodes(2, 32);
  double worst = 0.0;
  const auto start = Clock::now();
  for (int k = 0; k < 200; ++k) {
    const auto t = oracle::random_tree(rng, nodes(rng), 0.1, 2.0);
    const auto mu = oracle::random_measure(rng, t, 12);
    const auto nu = oracle::random_measure(rng, t, 12);
    const double ot = exact_ot(oracle::tree_cost(t, mu, nu), mu.weights(), nu.weights()).cost;
    worst = std::max(worst, std::abs(tw(t, mu, nu) - ot));
  }
  const double secs = seconds_since(start);
  report(1, "closed form vs exact OT", worst <= 1e-8 && secs < 10.0,
         fmt::format("200 instances, max |tw - ot| = {:.3g} (tol 1e-8), {:.3f} s (limit 10 s)",
                     worst, secs));
}

// ---- 2 ----
void round_trip() {
  std::mt19937_64 rng(1002);
  double worst = 0.0;
  bool supports_ok = true;
  for (int k = 0; k < 500; ++k) {
    const auto t = oracle::random_tree(rng, 2 + k % 100);
    const auto mu = oracle::random_measure(rng, t, 16);
    const auto back = inverse_map(tree_map(t, mu));
    if (back.size() != mu.size()) {
      supports_ok = false;
      continue;
    }
    for (std::size_t i = 0; i < mu.size(); ++i) {
      supports_ok = supports_ok && back.supports()[i] == mu.supports()[i];
      worst = std::max(worst, std::abs(back.weights()[i] - mu.weights()[i]));
    }
  }
  report(2, "round trip", supports_ok && worst <= 1e-12,
         fmt::format("500 pairs, supports {}, max weight error {:.3g} (tol 1e-12)",
                     supports_ok ? "identical" : "DIFFER", worst));
}

// ---- 3 ----
void median_optimality() {
  std::mt19937_64 rng(1003);
  std::uniform_real_distribution<double> u(-10, 10);
  int bad_value = 0;
  int bad_opt = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = 1 + k % 20;
    std::vector<double> a(n);
    for (auto& x : a) {
      x = k % 4 == 0 ? std::round(u(rng)) : u(rng);
    }
    const auto p = random_simplex(rng, n);
    const double m = weighted_median(a, p);
    bad_value += std::find(a.begin(), a.end(), m) == a.end() ? 1 : 0;
    const double f = oracle::median_objective(m, a, p);
    bool ok = true;
    for (const double c : a) {
      ok = ok && f <= oracle::median_objective(c, a, p) + 1e-12;
    }
    for (int r = 0; r < 100; ++r) {
      ok = ok && f <= oracle::median_objective(u(rng), a, p) + 1e-12;
    }
    bad_opt += ok ? 0 : 1;
  }
  report(3, "weighted median", bad_value == 0 && bad_opt == 0,
         fmt::format("1000 instances, {} non-input outputs, {} beaten by a candidate", bad_value,
                     bad_opt));
}

// ---- 4 ----
void barycenter_optimality() {
  std::mt19937_64 rng(1004);
  double worst = -1e300;  // max over candidates of objective - candidate objective
  int infeasible_medians = 0;
  bool valid = true;
  for (int k = 0; k < 100; ++k) {
    const auto t = oracle::random_tree(rng, 2 + k % 99);
    const auto set = random_set(rng, t, 1 + k % 10);
    const auto r = tw_barycenter(t, set);
    infeasible_medians += r.median_feasible ? 0 : 1;
    double mass = 0.0;
    for (const double w : r.barycenter.weights()) {
      valid = valid && w >= 0.0;
      mass += w;
    }
    valid = valid && std::abs(mass - 1.0) <= 1e-9;
    for (const auto& mu : set.measures()) {
      worst = std::max(worst, r.objective - barycenter_objective(t, mu, set));
    }
    for (int c = 0; c < 100; ++c) {
      worst = std::max(worst,
                       r.objective - barycenter_objective(t, oracle::random_measure(rng, t, 12), set));
    }
  }
  report(4, "barycenter optimality", worst <= 1e-9 && valid,
         fmt::format("100 instances, max excess over candidates {:.3g} (tol 1e-9), weights {}, "
                     "{} median fallbacks",
                     worst, valid ? "valid" : "INVALID", infeasible_medians));
}

// ---- 5 ----
double com_to_grid(const Tree& t, const std::vector<double>& dist, const CenterOfMass& c,
                   const oracle::FrechetGrid& g) {
  auto to_node = [&](NodeId z) {
    return c.on_node ? dist[c.node.index() * t.node_count() + z.index()]
                     : oracle::point_to_node(t, dist, c.edge, c.offset, z);
  };
  if (g.on_node) {
    return to_node(g.node);
  }
  if (!c.on_node && c.edge == g.edge) {
    return std::abs(c.offset - g.offset);
  }
  const double w = t.weight(g.edge);
  return std::min(g.offset + to_node(t.upper(g.edge)), w - g.offset + to_node(t.lower(g.edge)));
}

void center_of_mass_check() {
  std::mt19937_64 rng(1005);
  int misses = 0;
  double worst_value = 0.0;
  for (int k = 0; k < 200; ++k) {
    const auto t = oracle::random_tree(rng, 2 + k % 30);
    const auto nu = oracle::random_measure(rng, t, 10);
    const auto dist = oracle::floyd_distances(t);
    const auto c = center_of_mass(t, nu);
    const auto grid = oracle::frechet_grid_min(t, nu, 100);
    // one grid step on the edges next to the grid optimum
    double step = 0.0;
    if (grid.on_node) {
      for (const NodeId s : t.children(grid.node)) {
        step = std::max(step, t.weight(t.edge_above(s)) / 100.0);
      }
      if (t.parent(grid.node)) {
        step = std::max(step, t.weight(t.edge_above(grid.node)) / 100.0);
      }
    } else {
      step = t.weight(grid.edge) / 100.0;
    }
    misses += com_to_grid(t, dist, c, grid) <= step + 1e-12 ? 0 : 1;
    const double f = c.on_node ? oracle::frechet_at_node(t, dist, c.node, nu)
                               : oracle::frechet_on_edge(t, dist, c.edge, c.offset, nu);
    worst_value = std::max(worst_value, f - grid.best_value);
  }
  report(5, "center of mass", misses == 0 && worst_value <= 1e-12,
         fmt::format("200 instances, {} farther than one grid step, F(com) - grid min <= {:.3g}",
                     misses, worst_value));
}

// ---- 6 ----
void constrained() {
  std::mt19937_64 rng(1006);
  std::size_t over = 0;
  for (int k = 0; k < 200; ++k) {
    const auto t = oracle::random_tree(rng, 5 + k % 60);
    const auto set = random_set(rng, t, 2 + k % 6);
    for (int kappa = 1; kappa <= 5; ++kappa) {
      over += constrained_tw_barycenter(t, set, kappa, k).barycenter.size() >
                      static_cast<std::size_t>(kappa)
                  ? 1
                  : 0;
    }
  }
  double worst = 0.0;
  int instances = 0;
  for (int k = 0; k < 300; ++k) {
    const auto t = oracle::random_tree(rng, 2 + k % 7);
    const auto nu = oracle::random_measure(rng, t, 8);
    for (int kappa = 1; kappa <= 2; ++kappa) {
      const auto c = tree_kmeans(t, nu.supports(), nu.weights(), kappa, k);
      worst = std::max(worst, std::abs(c.objective - oracle::brute_force_kmeans(t, nu, kappa)));
      ++instances;
    }
  }
  report(6, "constrained barycenter", over == 0 && worst <= 1e-9,
         fmt::format("{} support-count violations in 1000 runs; k-means vs brute force on {} "
                     "instances (<= 8 nodes, kappa <= 2): max gap {:.3g} (tol 1e-9)",
                     over, instances, worst));
}

// ---- 7 ----
struct GmmRun {
  double ari = 0.0;
  double worst_rise = 0.0;  // largest trace increase relative to trace[0]
  int iterations = 0;
  double fit_seconds = 0.0;
};

GmmRun gmm_run(std::size_t groups, std::uint64_t seed, int K, std::size_t clusters = 6) {
  GmmGroupsConfig g;
  g.groups = groups;
  g.points_per_group = 200;
  g.clusters = clusters;
  g.seed = seed;
  const auto data = gmm_groups(g);
  PointCloud pooled;
  for (const auto& grp : data.groups) {
    pooled.append(grp);
  }
  SamplingConfig s;
  s.kappa = 4;
  s.depth = 5;
  s.num_trees = 10;
  s.seed = seed;
  const auto ensemble = sample_ensemble(pooled, s);
  MultilevelConfig cfg;
  cfg.global_K = K;
  cfg.seed = seed;
  const auto start = Clock::now();
  const auto state = multilevel_fit(ensemble.trees, data.groups, cfg);
  GmmRun out;
  out.fit_seconds = seconds_since(start);
  out.iterations = state.iterations;
  out.ari = adjusted_rand_index(state.group_assignment, data.labels);
  const double scale = std::abs(state.objective_trace.front());
  for (std::size_t i = 1; i < state.objective_trace.size(); ++i) {
    out.worst_rise = std::max(
        out.worst_rise, (state.objective_trace[i] - state.objective_trace[i - 1]) / scale);
  }
  return out;
}

long peak_rss_kb(const char* self, int K) {
  const std::string arg = std::to_string(K);
  const pid_t pid = fork();
  if (pid == 0) {
    execl(self, self, "--probe-memory", arg.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  int status = 0;
  rusage usage{};
  if (pid < 0 || wait4(pid, &status, 0, &usage) < 0 || !WIFEXITED(status) ||
      WEXITSTATUS(status) != 0) {
    return -1;
  }
  return usage.ru_maxrss;
}

void multilevel_check(const char* self) {
  std::vector<double> aris;
  double rise = 0.0;
  std::string per_seed;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = gmm_run(30, seed, 6);
    aris.push_back(r.ari);
    rise = std::max(rise, r.worst_rise);
    per_seed += fmt::format("{}{:.3f}", seed ? "," : "", r.ari);
  }
  std::sort(aris.begin(), aris.end());
  const double median = aris[2];

  // wall time vs group count, single threaded
  set_thread_count(1);
  std::vector<double> xs, ys;
  std::string times;
  for (const std::size_t m : {10, 30, 100}) {
    const auto r = gmm_run(m, 0, 6);
    xs.push_back(std::log(static_cast<double>(m)));
    ys.push_back(std::log(r.fit_seconds));
    times += fmt::format("{}{}:{:.2f}s/{}it", times.empty() ? "" : ",", m, r.fit_seconds,
                         r.iterations);
  }
  set_thread_count(0);
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / 3;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / 3;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;

  std::vector<long> rss;
  for (const int K : {5, 10, 20}) {
    rss.push_back(peak_rss_kb(self, K));
  }
  const bool rss_ok = *std::min_element(rss.begin(), rss.end()) > 0;
  const double ratio = rss_ok ? static_cast<double>(*std::max_element(rss.begin(), rss.end())) /
                                    static_cast<double>(*std::min_element(rss.begin(), rss.end()))
                              : 0.0;

  const bool ok = median >= 0.8 && rise <= 1e-6 && slope <= 1.2 && rss_ok && ratio <= 1.1;
  report(7, "multilevel convergence and recovery", ok,
         fmt::format("ARI median {:.3f} (>= 0.8; per seed {}), max relative trace rise {:.3g} "
                     "(<= 1e-6), wall-time slope {:.3f} over 10/30/100 groups (<= 1.2; "
                     "{}), peak RSS K=5/10/20 {}/{}/{} kB ratio {:.3f} (<= 1.1)",
                     median, per_seed, rise, slope, times, rss[0], rss[1], rss[2], ratio));
}

int probe_memory(int K) {
  (void)gmm_run(30, 0, K);
  return 0;
}

// ---- 8 ----
double covariance_error(const Moments& m, double sd) {
  const std::size_t d = m.mean.size();
  double err = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = 0; c < d; ++c) {
      err += std::abs(m.cov(r, c) - (r == c ? sd * sd : 0.0));
    }
  }
  return err;
}

void wasp_check() {
  const auto model = conjugate_gaussian(ConjugateGaussianConfig{});
  SamplingConfig cfg;
  cfg.num_trees = 10;
  const auto base = posterior_moments(wasp_aggregate(model.shards, cfg).samples);
  double mean_err = 0.0;
  for (std::size_t k = 0; k < base.mean.size(); ++k) {
    mean_err = std::max(mean_err, std::abs(base.mean[k] - model.full_mean[k]));
  }

  std::vector<double> stds;
  std::string detail;
  for (const int trees : {1, 10, 100}) {
    std::vector<double> errs;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      SamplingConfig c;
      c.num_trees = trees;
      c.seed = 1000 * seed;
      errs.push_back(
          covariance_error(posterior_moments(wasp_aggregate(model.shards, c).samples),
                           model.full_sd));
    }
    const double mean = std::accumulate(errs.begin(), errs.end(), 0.0) / errs.size();
    double var = 0.0;
    for (const double e : errs) {
      var += (e - mean) * (e - mean);
    }
    stds.push_back(std::sqrt(var / (errs.size() - 1)));
    detail += fmt::format("{}{} trees: {:.3g} +- {:.3g}", detail.empty() ? "" : ", ", trees, mean,
                          stds.back());
  }
  const bool ok = mean_err <= 0.05 && stds[1] <= stds[0] && stds[2] <= stds[1];
  report(8, "WASP accuracy", ok,
         fmt::format("max |mean - full posterior mean| {:.4f} (<= 0.05); covariance abs error "
                     "over 10 seeds: {} (std non-increasing)",
                     mean_err, detail));
}

// ---- 9 ----
void baseline_check() {
  set_thread_count(1);
  const auto c = suites::sinkhorn_compare(100, 50, 10, 100, 9);
  set_thread_count(0);
  report(9, "TW barycenter faster than Sinkhorn", c.tw_seconds < c.sinkhorn_seconds,
         fmt::format("100 measures x 50 supports, single thread: TW {:.4f} s vs Sinkhorn {:.4f} s "
                     "(100 iterations, {} fixed supports); TW objective {:.4f} vs Sinkhorn "
                     "barycenter scored on the tree {:.4f}",
                     c.tw_seconds, c.sinkhorn_seconds, c.fixed_support, c.tw_objective,
                     c.sinkhorn_tw_objective));
}

// ---- 10 ----
std::string write_csv(const PointCloud& p) {
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t k = 0; k < p.dim(); ++k) {
      out += (k ? "," : "") + io::format_double(p[i][k]);
    }
    out += "\n";
  }
  return out;
}

void determinism_check() {
  const fs::path root = fs::temp_directory_path() / fmt::format("treebary_accept_{}", getpid());
  fs::remove_all(root);
  const auto clouds = gaussian_clouds(6, 40, 2, 10.0, 5);
  PointCloud pooled;
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    io::write_file(root / "groups" / fmt::format("g{}.csv", i), write_csv(clouds[i]));
    pooled.append(clouds[i]);
  }
  io::write_file(root / "points.csv", write_csv(pooled));
  for (std::size_t i = 0; i < 3; ++i) {
    io::write_file(root / "measures" / fmt::format("m{}.csv", i), write_csv(clouds[i]));
  }
  ConjugateGaussianConfig g;
  g.observations = 1000;
  g.machines = 4;
  g.samples_per_machine = 200;
  const auto model = conjugate_gaussian(g);
  for (std::size_t i = 0; i < model.shards.shards.size(); ++i) {
    io::write_file(root / "shards" / fmt::format("s{}.csv", i), write_csv(model.shards.shards[i]));
  }

  const std::string cli = TREEBARY_CLI;
  const auto r = root.string();
  auto commands = [&](const std::string& out) {
    return std::vector<std::string>{
        fmt::format("{} --seed 3 sample-tree {}/points.csv --num-trees 3 --out {}/ens.json", cli,
                    r, out),
        fmt::format("{} --seed 3 barycenter {}/ens.json {}/measures --out {}/bary.json", cli, out,
                    r, out),
        fmt::format("{} --seed 3 barycenter {}/ens.json {}/measures --max-supports 3 --weights "
                    "0.5,0.25,0.25 --out {}/bary_k.json",
                    cli, out, r, out),
        fmt::format("{} --seed 3 multilevel {}/groups --global-K 2 --num-trees 2 --out {}/ml", cli,
                    r, out),
        fmt::format("{} --seed 3 wasp {}/shards --num-trees 3 --out {}/wasp", cli, r, out),
        fmt::format("{} --seed 3 bench --suite tw-vs-oracle --instances 20 --out {}/bench", cli,
                    out),
        fmt::format("{} --seed 3 bench --suite barycenter-scaling --out {}/bench_scaling", cli,
                    out),
    };
  };
  const std::vector<std::string> outputs{
      "ens.json",         "ens.json.manifest.json", "bary.json",
      "bary.json.manifest.json", "bary_k.json",     "ml/result.json",
      "ml/objective_trace.csv",  "ml/ensemble.json", "ml/manifest.json",
      "wasp/samples.csv", "wasp/moments.json",      "wasp/manifest.json",
      "bench/results.csv", "bench_scaling/results.csv"};

  int command_failures = 0;
  for (const std::string run : {"run_a", "run_b"}) {
    fs::create_directories(root / run);
    for (const auto& cmd : commands((root / run).string())) {
      if (std::system((cmd + " > /dev/null 2>&1").c_str()) != 0) {
        ++command_failures;
        fmt::print("    command failed: {}\n", cmd);
      }
    }
  }
  int differ = 0;
  for (const auto& f : outputs) {
    const auto a = root / "run_a" / f;
    const auto b = root / "run_b" / f;
    if (!fs::exists(a) || !fs::exists(b) || io::read_file(a) != io::read_file(b)) {
      ++differ;
      fmt::print("    differs or missing: {}\n", f);
    }
  }
  fs::remove_all(root);
  report(10, "CLI determinism", command_failures == 0 && differ == 0,
         fmt::format("7 commands run twice, {} failed; {} of {} outputs differ byte-wise",
                     command_failures, differ, outputs.size()));
}

}  // namespace

int main(int argc, char** argv) {
  if (argc == 3 && std::string(argv[1]) == "--probe-memory") {
    return probe_memory(std::stoi(argv[2]));
  }
  const char* self = "/proc/self/exe";
  std::vector<std::pair<int, std::function<void()>>> all{
      {1, closed_form},
      {2, round_trip},
      {3, median_optimality},
      {4, barycenter_optimality},
      {5, center_of_mass_check},
      {6, constrained},
      {7, [&] { multilevel_check(self); }},
      {8, wasp_check},
      {9, baseline_check},
      {10, determinism_check},
  };
  // optional: run a subset, e.g. `acceptance 7 9`
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) {
    only.push_back(std::stoi(argv[i]));
  }
  for (const auto& [id, run] : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) {
      continue;
    }
    const auto start = Clock::now();
    try {
      run();
    } catch (const std::exception& e) {
      report(id, "criterion", false, fmt::format("threw: {}", e.what()));
    }
    fmt::print("    ({:.1f} s)\n", seconds_since(start));
  }
  fmt::print("{} failing criteria\n", failures);
  return failures == 0 ? 0 : 1;
}
