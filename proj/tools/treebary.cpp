#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "suites.hpp"
#include "treebary/barycenter.hpp"
#include "treebary/error.hpp"
#include "treebary/io.hpp"
#include "treebary/multilevel.hpp"
#include "treebary/parallel.hpp"
#include "treebary/tree_kmeans.hpp"
#include "treebary/tree_sampling.hpp"
#include "treebary/wasp.hpp"

namespace fs = std::filesystem;
using namespace treebary;
using io::Json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Globals {
  std::optional<std::uint64_t> seed;
  int threads = 0;
};

std::uint64_t resolve_seed(const Globals& g) {
  if (g.seed) {
    return *g.seed;
  }
  if (const char* env = std::getenv("TREEBARY_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) {
        return v;
      }
    } catch (const std::exception&) {
    }
    throw CLI::ValidationError("TREEBARY_SEED", fmt::format("not an unsigned integer: '{}'", env));
  }
  return 0;
}

Json hash_inputs(const std::vector<fs::path>& files) {
  Json out = Json::object();
  for (const auto& f : files) {
    out[f.filename().string()] = io::hash_hex(io::read_file(f));
  }
  return out;
}

void write_manifest(const fs::path& path, const std::string& command, const Json& config,
                    std::uint64_t seed, const Json& inputs, const Json& outputs) {
  const Json manifest{{"command", command}, {"config", config}, {"seed", seed},
                      {"inputs", inputs},   {"outputs", outputs}, {"version", kVersion}};
  io::write_file(path, io::dump(manifest) + "\n");
}

Json sampling_json(const SamplingConfig& c) {
  return Json{{"kappa", c.kappa},
              {"depth", c.depth},
              {"num_trees", c.num_trees},
              {"seed", c.seed},
              {"min_edge_weight", c.min_edge_weight}};
}

void add_sampling_flags(CLI::App* cmd, SamplingConfig& cfg) {
  cmd->add_option("--kappa", cfg.kappa, "clusters per tree node")->capture_default_str();
  cmd->add_option("--depth", cfg.depth, "deepest tree level (root is 1)")->capture_default_str();
  cmd->add_option("--num-trees", cfg.num_trees, "trees in the ensemble")->capture_default_str();
  cmd->add_option("--min-edge-weight", cfg.min_edge_weight, "edge weight floor")
      ->capture_default_str();
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out += (i ? "," : "") + cells[i];
  }
  return out + "\n";
}

Json export_points(const std::vector<Tree>& trees, const std::vector<DiscreteMeasure>& per_tree,
                   double coefficient) {
  Json out = Json::array();
  for (std::size_t t = 0; t < trees.size(); ++t) {
    for (std::size_t j = 0; j < per_tree[t].size(); ++j) {
      const auto e = trees[t].embedding(per_tree[t].supports()[j]);
      out.push_back(Json{{"tree", t},
                         {"weight", per_tree[t].weights()[j] * coefficient},
                         {"point", std::vector<double>(e.begin(), e.end())}});
    }
  }
  return out;
}

// ---- sample-tree ----

struct SampleTreeArgs {
  fs::path points;
  fs::path out;
  SamplingConfig cfg;
};

void run_sample_tree(const SampleTreeArgs& a, std::uint64_t seed) {
  auto cfg = a.cfg;
  cfg.seed = seed;
  const auto points = io::read_points_csv(a.points);
  const auto ensemble = sample_ensemble(points, cfg);
  io::write_file(a.out, io::dump(io::ensemble_to_json(ensemble)) + "\n");
  write_manifest(fs::path(a.out).concat(".manifest.json"), "sample-tree", sampling_json(cfg), seed,
                 hash_inputs({a.points}), Json::array({a.out.filename().string()}));
}

// ---- barycenter ----

struct BarycenterArgs {
  fs::path ensemble;
  fs::path measures;
  std::vector<double> weights;
  std::optional<int> max_supports;
  fs::path out;
};

void run_barycenter(const BarycenterArgs& a, std::uint64_t seed) {
  const auto ensemble = io::ensemble_from_json(io::parse_json(io::read_file(a.ensemble),
                                                              a.ensemble.string()));
  require(!ensemble.trees.empty(), ErrorKind::Domain, "ensemble has no trees");
  const auto files = io::csv_files(a.measures);
  require(!files.empty(), ErrorKind::Domain,
          fmt::format("no .csv measure files in {}", a.measures.string()));
  std::vector<double> p = a.weights;
  if (p.empty()) {
    p.assign(files.size(), 1.0 / static_cast<double>(files.size()));
  }
  require(p.size() == files.size(), ErrorKind::Domain,
          fmt::format("{} weights for {} measures", p.size(), files.size()));

  // Each file holds points (x1..xd) or weighted points (x1..xd,mass).
  const std::size_t dim = ensemble.trees.front().dim();
  require(dim > 0, ErrorKind::Unsupported, "ensemble trees carry no embeddings");
  std::vector<PointCloud> clouds;
  std::vector<std::vector<double>> masses;
  for (const auto& f : files) {
    const auto rows = io::read_csv_rows(f);
    require(!rows.empty(), ErrorKind::Domain, fmt::format("{}: no rows", f.string()));
    const std::size_t cols = rows.front().size();
    require(cols == dim || cols == dim + 1, ErrorKind::Structural,
            fmt::format("{}: {} columns but the trees are {}-dimensional", f.string(), cols, dim));
    PointCloud cloud;
    std::vector<double> m;
    for (const auto& r : rows) {
      cloud.push_back(std::span<const double>(r).first(dim));
      m.push_back(cols == dim ? 1.0 : r[dim]);
    }
    clouds.push_back(std::move(cloud));
    masses.push_back(std::move(m));
  }

  std::vector<WeightedMeasureSet> sets;
  for (const auto& tree : ensemble.trees) {
    std::vector<DiscreteMeasure> ms;
    for (std::size_t i = 0; i < clouds.size(); ++i) {
      ms.push_back(from_points(tree, clouds[i], masses[i]));
    }
    sets.emplace_back(std::move(ms), p);
  }
  BarycenterSolver solver;
  if (a.max_supports) {
    const int kappa = *a.max_supports;
    solver = [kappa, seed](const Tree& tree, const WeightedMeasureSet& set, std::size_t t) {
      return constrained_tw_barycenter(tree, set, kappa, seed + t);
    };
  }
  const auto result = ensemble_barycenter(ensemble.trees, sets, solver);

  Json per_tree = Json::array();
  std::vector<DiscreteMeasure> measures;
  for (const auto& r : result.per_tree) {
    per_tree.push_back(Json{{"barycenter", io::measure_to_json(r.barycenter)},
                            {"objective", r.objective},
                            {"lower_bound", r.lower_bound},
                            {"median_feasible", r.median_feasible}});
    measures.push_back(r.barycenter);
  }
  const Json out{{"per_tree", per_tree},
                 {"mixture_coefficient", result.mixture_coefficient},
                 {"export", export_points(ensemble.trees, measures, result.mixture_coefficient)}};
  io::write_file(a.out, io::dump(out) + "\n");

  std::vector<fs::path> inputs{a.ensemble};
  inputs.insert(inputs.end(), files.begin(), files.end());
  Json config{{"weights", p}, {"measures", files.size()}};
  config["max_supports"] = a.max_supports ? Json(*a.max_supports) : Json(nullptr);
  write_manifest(fs::path(a.out).concat(".manifest.json"), "barycenter", config, seed,
                 hash_inputs(inputs), Json::array({a.out.filename().string()}));
}

// ---- multilevel ----

struct MultilevelArgs {
  fs::path groups;
  fs::path out;
  MultilevelConfig cfg;
  SamplingConfig sampling;
};

void run_multilevel(const MultilevelArgs& a, std::uint64_t seed) {
  auto cfg = a.cfg;
  auto sampling = a.sampling;
  cfg.seed = seed;
  sampling.seed = seed;
  const auto files = io::csv_files(a.groups);
  require(!files.empty(), ErrorKind::Domain,
          fmt::format("no .csv group files in {}", a.groups.string()));
  std::vector<PointCloud> groups;
  PointCloud pooled;
  for (const auto& f : files) {
    groups.push_back(io::read_points_csv(f));
    require(pooled.empty() || groups.back().dim() == pooled.dim(), ErrorKind::Domain,
            fmt::format("{}: dimension differs from earlier groups", f.string()));
    pooled.append(groups.back());
  }
  const auto ensemble = sample_ensemble(pooled, sampling);
  const auto state = multilevel_fit(ensemble.trees, groups, cfg);

  Json local = Json::array();
  Json global = Json::array();
  for (std::size_t t = 0; t < ensemble.size(); ++t) {
    Json lt = Json::array();
    for (const auto& g : state.local_measures[t]) {
      lt.push_back(io::measure_to_json(g));
    }
    Json gt = Json::array();
    for (const auto& q : state.global_measures[t]) {
      gt.push_back(io::measure_to_json(q));
    }
    local.push_back(std::move(lt));
    global.push_back(std::move(gt));
  }
  Json names = Json::array();
  for (const auto& f : files) {
    names.push_back(f.filename().string());
  }
  const Json result{{"groups", names},
                    {"assignments", state.group_assignment},
                    {"local_measures", local},
                    {"global_measures", global},
                    {"objective_trace", state.objective_trace},
                    {"iterations", state.iterations},
                    {"converged", state.converged},
                    {"rejected_local_steps", state.rejected_local_steps}};
  io::write_file(a.out / "result.json", io::dump(result) + "\n");
  io::write_file(a.out / "ensemble.json", io::dump(io::ensemble_to_json(ensemble)) + "\n");
  std::string trace = "iteration,objective\n";
  for (std::size_t i = 0; i < state.objective_trace.size(); ++i) {
    trace += csv_line({std::to_string(i), io::format_double(state.objective_trace[i])});
  }
  io::write_file(a.out / "objective_trace.csv", trace);

  const Json config{{"local_k", cfg.local_k},         {"global_K", cfg.global_K},
                    {"lambda", cfg.lambda},           {"max_iters", cfg.max_iters},
                    {"tolerance", cfg.tolerance},     {"kmeans_restarts", cfg.kmeans.restarts},
                    {"kmeans_max_iters", cfg.kmeans.max_iters},
                    {"sampling", sampling_json(sampling)}};
  write_manifest(a.out / "manifest.json", "multilevel", config, seed, hash_inputs(files),
                 Json::array({"result.json", "ensemble.json", "objective_trace.csv"}));
}

// ---- wasp ----

struct WaspArgs {
  fs::path shards;
  fs::path out;
  SamplingConfig cfg;
};

void run_wasp(const WaspArgs& a, std::uint64_t seed) {
  auto cfg = a.cfg;
  cfg.seed = seed;
  const auto files = io::csv_files(a.shards);
  require(!files.empty(), ErrorKind::Domain,
          fmt::format("no .csv shard files in {}", a.shards.string()));
  PosteriorShards shards;
  for (const auto& f : files) {
    shards.shards.push_back(io::read_points_csv(f));
  }
  const auto result = wasp_aggregate(shards, cfg);
  const std::size_t dim = shards.dim();

  std::vector<std::string> header{"weight"};
  for (std::size_t k = 1; k <= dim; ++k) {
    header.push_back(fmt::format("param_{}", k));
  }
  std::string csv = csv_line(header);
  for (std::size_t i = 0; i < result.samples.weights.size(); ++i) {
    std::vector<std::string> cells{io::format_double(result.samples.weights[i])};
    for (const double x : result.samples.samples[i]) {
      cells.push_back(io::format_double(x));
    }
    csv += csv_line(cells);
  }
  io::write_file(a.out / "samples.csv", csv);

  const auto m = posterior_moments(result.samples);
  Json objectives = Json::array();
  for (const auto& r : result.barycenter.per_tree) {
    objectives.push_back(r.objective);
  }
  const Json moments{{"mean", m.mean},
                     {"covariance", m.covariance},
                     {"dim", dim},
                     {"machines", shards.machine_count()},
                     {"per_tree_objective", objectives}};
  io::write_file(a.out / "moments.json", io::dump(moments) + "\n");
  write_manifest(a.out / "manifest.json", "wasp", sampling_json(cfg), seed, hash_inputs(files),
                 Json::array({"samples.csv", "moments.json"}));
}

// ---- bench ----

struct BenchArgs {
  std::string suite;
  fs::path out;
  std::size_t instances = 200;
};

Json machine_info() {
  return Json{{"hardware_threads", std::thread::hardware_concurrency()},
              {"omp_threads", thread_count()},
#if defined(__VERSION__)
              {"compiler", __VERSION__},
#endif
              {"version", kVersion}};
}

void run_bench(const BenchArgs& a, std::uint64_t seed) {
  // results.csv holds deterministic values; wall times go to timings.csv.
  std::string results;
  std::string timings;
  Json summary = Json::object();
  if (a.suite == "tw-vs-oracle") {
    const auto start = std::chrono::steady_clock::now();
    const auto rows = suites::tw_vs_oracle(a.instances, 32, 12, seed);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    results = "instance,nodes,mu_supports,nu_supports,tw,exact_ot,abs_diff\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      const double diff = std::abs(r.tw - r.exact);
      worst = std::max(worst, diff);
      results += csv_line({std::to_string(i), std::to_string(r.nodes),
                           std::to_string(r.mu_supports), std::to_string(r.nu_supports),
                           io::format_double(r.tw), io::format_double(r.exact),
                           io::format_double(diff)});
    }
    summary["max_abs_diff"] = worst;
    timings = "suite,seconds\n" + csv_line({a.suite, io::format_double(secs)});
  } else if (a.suite == "barycenter-scaling") {
    const auto rows = suites::barycenter_scaling({10, 100, 1000}, 50, seed);
    results = "measures,tree_nodes,objective\n";
    timings = "measures,seconds\n";
    for (const auto& r : rows) {
      results += csv_line({std::to_string(r.measures), std::to_string(r.tree_nodes),
                           io::format_double(r.objective)});
      timings += csv_line({std::to_string(r.measures), io::format_double(r.seconds)});
    }
  } else if (a.suite == "sinkhorn-compare") {
    const auto c = suites::sinkhorn_compare(100, 50, 10, 100, seed);
    results =
        "measures,supports,fixed_support,sinkhorn_iters,sinkhorn_epsilon,marginal_violation,"
        "tw_objective,sinkhorn_tw_objective\n";
    results += csv_line({std::to_string(c.measures), std::to_string(c.supports),
                         std::to_string(c.fixed_support), std::to_string(c.sinkhorn_iters),
                         io::format_double(c.sinkhorn_epsilon),
                         io::format_double(c.marginal_violation), io::format_double(c.tw_objective),
                         io::format_double(c.sinkhorn_tw_objective)});
    timings = "method,seconds\n" + csv_line({"tw", io::format_double(c.tw_seconds)}) +
              csv_line({"sinkhorn", io::format_double(c.sinkhorn_seconds)});
  } else {
    throw CLI::ValidationError("--suite", fmt::format("unknown suite '{}'", a.suite));
  }
  io::write_file(a.out / "results.csv", results);
  io::write_file(a.out / "timings.csv", timings);
  io::write_file(a.out / "machine.json", io::dump(machine_info()) + "\n");
  const Json config{{"suite", a.suite}, {"instances", a.instances}, {"summary", summary}};
  write_manifest(a.out / "manifest.json", "bench", config, seed, Json::object(),
                 Json::array({"results.csv", "timings.csv", "machine.json"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-Wasserstein distances, barycenters, multilevel clustering and WASP"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "random seed (falls back to TREEBARY_SEED, then 0)");
  app.add_option("--threads", g.threads, "data-parallel width (0 = all cores)")
      ->check(CLI::NonNegativeNumber);

  SampleTreeArgs st;
  auto* st_cmd = app.add_subcommand("sample-tree", "sample a tree ensemble from a point CSV");
  st_cmd->add_option("points", st.points, "point cloud CSV")->required()->check(CLI::ExistingFile);
  st_cmd->add_option("--out", st.out, "ensemble JSON")->required();
  add_sampling_flags(st_cmd, st.cfg);

  BarycenterArgs ba;
  auto* ba_cmd = app.add_subcommand("barycenter", "per-tree TW barycenters of point measures");
  ba_cmd->add_option("ensemble", ba.ensemble, "ensemble JSON")->required()->check(CLI::ExistingFile);
  ba_cmd->add_option("measures", ba.measures, "directory of measure CSVs")
      ->required()
      ->check(CLI::ExistingDirectory);
  ba_cmd->add_option("--weights", ba.weights, "mixture weights, one per file (default uniform)")
      ->delimiter(',');
  ba_cmd->add_option("--max-supports", ba.max_supports, "support limit (constrained barycenter)")
      ->check(CLI::PositiveNumber);
  ba_cmd->add_option("--out", ba.out, "result JSON")->required();

  MultilevelArgs ml;
  ml.sampling.depth = 5;
  auto* ml_cmd = app.add_subcommand("multilevel", "multilevel clustering of point groups");
  ml_cmd->add_option("groups", ml.groups, "directory of group CSVs")
      ->required()
      ->check(CLI::ExistingDirectory);
  ml_cmd->add_option("--local-k", ml.cfg.local_k, "supports per group (one value or one per group)")
      ->delimiter(',')
      ->capture_default_str();
  ml_cmd->add_option("--global-K", ml.cfg.global_K, "global clusters")->capture_default_str();
  ml_cmd->add_option("--lambda", ml.cfg.lambda, "global term weight")->capture_default_str();
  ml_cmd->add_option("--max-iters", ml.cfg.max_iters, "outer iterations")->capture_default_str();
  ml_cmd->add_option("--tolerance", ml.cfg.tolerance, "relative objective change")
      ->capture_default_str();
  ml_cmd->add_option("--out", ml.out, "output directory")->required();
  add_sampling_flags(ml_cmd, ml.sampling);

  WaspArgs wa;
  auto* wa_cmd = app.add_subcommand("wasp", "aggregate subset posteriors");
  wa_cmd->add_option("shards", wa.shards, "directory of shard CSVs")
      ->required()
      ->check(CLI::ExistingDirectory);
  wa_cmd->add_option("--out", wa.out, "output directory")->required();
  add_sampling_flags(wa_cmd, wa.cfg);

  BenchArgs be;
  auto* be_cmd = app.add_subcommand("bench", "benchmark suites");
  be_cmd->add_option("--suite", be.suite, "tw-vs-oracle | barycenter-scaling | sinkhorn-compare")
      ->required()
      ->check(CLI::IsMember({"tw-vs-oracle", "barycenter-scaling", "sinkhorn-compare"}));
  be_cmd->add_option("--instances", be.instances, "tw-vs-oracle instance count")
      ->capture_default_str();
  be_cmd->add_option("--out", be.out, "output directory")->required();

  try {
    app.parse(argc, argv);
    set_thread_count(g.threads);
    const auto seed = resolve_seed(g);
    if (*st_cmd) {
      run_sample_tree(st, seed);
    } else if (*ba_cmd) {
      run_barycenter(ba, seed);
    } else if (*ml_cmd) {
      run_multilevel(ml, seed);
    } else if (*wa_cmd) {
      run_wasp(wa, seed);
    } else if (*be_cmd) {
      run_bench(be, seed);
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    app.exit(e);
    return 2;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error (internal): " << e.what() << "\n";
    return 4;
  }
  return 0;
}
