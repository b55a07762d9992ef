#include "treebary/wasp.hpp"

#include <cmath>

#include <fmt/format.h>

#include "treebary/error.hpp"
#include "treebary/measure.hpp"

namespace treebary {

std::size_t PosteriorShards::dim() const {
  return shards.empty() ? 0 : shards.front().dim();
}

void PosteriorShards::validate() const {
  require(!shards.empty(), ErrorKind::Domain, "no posterior shards");
  for (std::size_t i = 0; i < shards.size(); ++i) {
    require(!shards[i].empty(), ErrorKind::Domain, fmt::format("shard {} has no samples", i));
    require(shards[i].dim() == dim(), ErrorKind::Domain,
            fmt::format("shard {} has dimension {}, shard 0 has {}", i, shards[i].dim(), dim()));
  }
}

WaspResult wasp_aggregate(const PosteriorShards& shards, const SamplingConfig& cfg) {
  shards.validate();
  cfg.validate();
  PointCloud pooled;
  for (const auto& s : shards.shards) {
    pooled.append(s);
  }
  auto ensemble = sample_ensemble(pooled, cfg);

  std::vector<WeightedMeasureSet> sets;
  sets.reserve(ensemble.size());
  for (const auto& tree : ensemble.trees) {
    std::vector<DiscreteMeasure> empirical;
    empirical.reserve(shards.machine_count());
    for (const auto& s : shards.shards) {
      empirical.push_back(uniform_empirical(tree, s));
    }
    sets.push_back(WeightedMeasureSet::uniform(std::move(empirical)));
  }
  auto barycenter = ensemble_barycenter(ensemble.trees, sets);

  WeightedSamples samples;
  for (std::size_t t = 0; t < ensemble.size(); ++t) {
    const auto& mu = barycenter.per_tree[t].barycenter;
    for (std::size_t j = 0; j < mu.size(); ++j) {
      samples.samples.push_back(ensemble.trees[t].embedding(mu.supports()[j]));
      samples.weights.push_back(mu.weights()[j] * barycenter.mixture_coefficient);
    }
  }
  return WaspResult{std::move(ensemble), std::move(barycenter), std::move(samples)};
}

Moments posterior_moments(const WeightedSamples& samples) {
  const std::size_t n = samples.samples.size();
  require(n > 0, ErrorKind::Domain, "moments of an empty sample set");
  require(samples.weights.size() == n, ErrorKind::Domain,
          fmt::format("{} samples but {} weights", n, samples.weights.size()));
  double total = 0.0;
  for (const double w : samples.weights) {
    require(std::isfinite(w) && w >= 0.0, ErrorKind::Domain,
            fmt::format("invalid sample weight {}", w));
    total += w;
  }
  require(total > 0.0, ErrorKind::Domain, "sample weights sum to zero");

  const std::size_t d = samples.samples.dim();
  Moments m;
  m.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = samples.samples[i];
    for (std::size_t a = 0; a < d; ++a) {
      m.mean[a] += samples.weights[i] * x[a];
    }
  }
  for (auto& v : m.mean) {
    v /= total;
  }
  m.covariance.assign(d * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = samples.samples[i];
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = 0; b < d; ++b) {
        m.covariance[a * d + b] +=
            samples.weights[i] * (x[a] - m.mean[a]) * (x[b] - m.mean[b]);
      }
    }
  }
  for (auto& v : m.covariance) {
    v /= total;
  }
  return m;
}

}  // namespace treebary
