#include "treebary/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "treebary/error.hpp"

namespace treebary {

GmmGroups gmm_groups(const GmmGroupsConfig& cfg) {
  require(cfg.groups >= 1 && cfg.points_per_group >= 1 && cfg.clusters >= 1 &&
              cfg.components >= 1 && cfg.dim >= 1,
          ErrorKind::Domain, "GMM generator sizes must be positive");
  require(cfg.component_sd > 0.0 && cfg.box > 0.0, ErrorKind::Domain,
          "GMM generator scales must be positive");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> where(-cfg.box, cfg.box);
  std::normal_distribution<double> noise(0.0, cfg.component_sd);
  std::uniform_int_distribution<std::size_t> component(0, cfg.components - 1);

  GmmGroups out;
  for (std::size_t c = 0; c < cfg.clusters; ++c) {
    PointCloud means;
    std::vector<double> mean(cfg.dim);
    for (std::size_t k = 0; k < cfg.components; ++k) {
      for (auto& x : mean) {
        x = where(rng);
      }
      means.push_back(mean);
    }
    out.component_means.push_back(std::move(means));
  }
  out.labels.resize(cfg.groups);
  for (std::size_t i = 0; i < cfg.groups; ++i) {
    out.labels[i] = i % cfg.clusters;
  }
  std::shuffle(out.labels.begin(), out.labels.end(), rng);

  std::vector<double> x(cfg.dim);
  for (std::size_t i = 0; i < cfg.groups; ++i) {
    const auto& means = out.component_means[out.labels[i]];
    PointCloud group;
    for (std::size_t j = 0; j < cfg.points_per_group; ++j) {
      const auto mu = means[component(rng)];
      for (std::size_t a = 0; a < cfg.dim; ++a) {
        x[a] = mu[a] + noise(rng);
      }
      group.push_back(x);
    }
    out.groups.push_back(std::move(group));
  }
  return out;
}

ConjugateGaussian conjugate_gaussian(const ConjugateGaussianConfig& cfg) {
  require(cfg.dim >= 1 && cfg.machines >= 1 && cfg.samples_per_machine >= 1, ErrorKind::Domain,
          "conjugate model sizes must be positive");
  require(cfg.observations >= cfg.machines && cfg.observations % cfg.machines == 0,
          ErrorKind::Domain, "observations must split evenly across machines");
  require(cfg.sigma > 0.0 && cfg.prior_sd > 0.0, ErrorKind::Domain,
          "conjugate model scales must be positive");
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> where(-2.0, 2.0);
  std::normal_distribution<double> standard(0.0, 1.0);

  ConjugateGaussian out;
  out.true_theta.resize(cfg.dim);
  for (auto& t : out.true_theta) {
    t = where(rng);
  }
  const std::size_t per_machine = cfg.observations / cfg.machines;
  const double prior_precision = 1.0 / (cfg.prior_sd * cfg.prior_sd);
  const double noise_precision = 1.0 / (cfg.sigma * cfg.sigma);
  const double power = static_cast<double>(cfg.machines);

  std::vector<std::vector<double>> shard_sums(cfg.machines, std::vector<double>(cfg.dim, 0.0));
  std::vector<double> total_sum(cfg.dim, 0.0);
  for (std::size_t s = 0; s < cfg.machines; ++s) {
    for (std::size_t j = 0; j < per_machine; ++j) {
      for (std::size_t a = 0; a < cfg.dim; ++a) {
        const double x = out.true_theta[a] + cfg.sigma * standard(rng);
        shard_sums[s][a] += x;
        total_sum[a] += x;
      }
    }
  }

  const double full_precision =
      prior_precision + static_cast<double>(cfg.observations) * noise_precision;
  out.full_sd = 1.0 / std::sqrt(full_precision);
  out.full_mean.resize(cfg.dim);
  for (std::size_t a = 0; a < cfg.dim; ++a) {
    out.full_mean[a] = noise_precision * total_sum[a] / full_precision;
  }

  const double subset_precision =
      prior_precision + power * static_cast<double>(per_machine) * noise_precision;
  const double subset_sd = 1.0 / std::sqrt(subset_precision);
  std::vector<double> sample(cfg.dim);
  for (std::size_t s = 0; s < cfg.machines; ++s) {
    PointCloud shard;
    for (std::size_t j = 0; j < cfg.samples_per_machine; ++j) {
      for (std::size_t a = 0; a < cfg.dim; ++a) {
        const double mean = power * noise_precision * shard_sums[s][a] / subset_precision;
        sample[a] = mean + subset_sd * standard(rng);
      }
      shard.push_back(sample);
    }
    out.shards.shards.push_back(std::move(shard));
  }
  return out;
}

std::vector<PointCloud> gaussian_clouds(std::size_t count, std::size_t size, std::size_t dim,
                                        double box, std::uint64_t seed) {
  require(count >= 1 && size >= 1 && dim >= 1, ErrorKind::Domain, "cloud sizes must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> center(-box, box);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<PointCloud> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> c(dim);
    for (auto& x : c) {
      x = center(rng);
    }
    std::vector<double> data(size * dim);
    for (std::size_t j = 0; j < data.size(); ++j) {
      data[j] = c[j % dim] + noise(rng);
    }
    out.emplace_back(dim, std::move(data));
  }
  return out;
}

}  // namespace treebary
