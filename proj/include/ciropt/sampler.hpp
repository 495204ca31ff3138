#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "ciropt/random.hpp"
#include "ciropt/search_space.hpp"

namespace ciropt {

/// What a sampler is allowed to see of a finished trial.
struct Observation {
  HyperparamPoint theta;
  double objective = 0.0;
};

class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual HyperparamPoint suggest(std::span<const Observation> history, Rng& rng) const = 0;
  virtual std::string_view name() const = 0;
};

class RandomSampler final : public Sampler {
 public:
  explicit RandomSampler(SearchSpace space = {}) : space_(std::move(space)) {}
  HyperparamPoint suggest(std::span<const Observation> history, Rng& rng) const override;
  std::string_view name() const override { return "random"; }

 private:
  SearchSpace space_;
};

struct TpeConfig {
  std::size_t n_startup = 10;
  double good_fraction = 0.25;
  std::size_t n_candidates = 24;
  double min_bandwidth_ratio = 1e-3;
};

/// Tree-structured Parzen estimator. Higher objective is better.
class TpeSampler final : public Sampler {
 public:
  explicit TpeSampler(SearchSpace space = {}, TpeConfig config = {})
      : space_(std::move(space)), config_(config) {}
  HyperparamPoint suggest(std::span<const Observation> history, Rng& rng) const override;
  std::string_view name() const override { return "tpe"; }

  const TpeConfig& config() const { return config_; }

 private:
  SearchSpace space_;
  TpeConfig config_;
};

/// Size of the "good" set for `n` observations: ceil(fraction * n), at least 1.
std::size_t tpe_good_count(std::size_t n, double fraction);

/// Truncated Gaussian Parzen density on [low, high] in the given coordinates.
class ParzenEstimator {
 public:
  ParzenEstimator(std::vector<double> centers, double low, double high, double min_bandwidth_ratio);

  double bandwidth() const { return bandwidth_; }
  bool is_uniform() const { return centers_.empty(); }
  double log_density(double x) const;
  double sample(Rng& rng) const;

 private:
  std::vector<double> centers_;
  std::vector<double> mass_;
  double low_;
  double high_;
  double bandwidth_ = 0.0;
};

/// Add-one smoothed categorical distribution; uniform when built from no counts.
class CategoricalEstimator {
 public:
  CategoricalEstimator(const std::vector<std::size_t>& observed, std::size_t n_categories, bool uniform);

  double log_prob(std::size_t category) const;
  std::size_t sample(Rng& rng) const;
  std::span<const double> probs() const { return probs_; }

 private:
  std::vector<double> probs_;
};

}  // namespace ciropt
