#include "ciropt/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ciropt/error.hpp"

namespace ciropt {

namespace {

constexpr double kLogZero = -1e300;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double safe_log(double v) { return v > 0.0 ? std::log(v) : kLogZero; }

std::size_t index_of(const std::vector<double>& values, double v) {
  const auto it = std::find(values.begin(), values.end(), v);
  if (it == values.end()) throw InvalidInput("categorical value outside the search space");
  return static_cast<std::size_t>(it - values.begin());
}

double sort_key(double objective) {
  return std::isnan(objective) ? -std::numeric_limits<double>::infinity() : objective;
}

// Estimators for every dimension, built from one side of the good/bad split.
struct DensityModel {
  CategoricalEstimator family;
  ParzenEstimator beta;
  ParzenEstimator log_c;
  CategoricalEstimator l1_ratio;
  ParzenEstimator max_depth;
  ParzenEstimator min_split;
  CategoricalEstimator max_samples;
};

DensityModel build(const std::vector<const HyperparamPoint*>& points, const SearchSpace& space, double bw_ratio) {
  std::vector<std::size_t> families;
  std::vector<double> betas;
  std::vector<double> log_cs;
  std::vector<std::size_t> l1s;
  std::vector<double> depths;
  std::vector<double> splits;
  std::vector<std::size_t> samples;
  for (const auto* p : points) {
    betas.push_back(std::log(p->beta));
    if (const auto* lr = p->logistic()) {
      families.push_back(0);
      log_cs.push_back(std::log(lr->C));
      l1s.push_back(index_of(space.l1_ratios, lr->l1_ratio));
    } else {
      const auto* rf = p->forest();
      families.push_back(1);
      depths.push_back(rf->max_depth);
      splits.push_back(rf->min_samples_split);
      samples.push_back(index_of(space.max_samples, rf->max_samples));
    }
  }
  const bool lr_uniform = log_cs.size() < 2;
  const bool rf_uniform = depths.size() < 2;
  return DensityModel{
      CategoricalEstimator(families, 2, false),
      ParzenEstimator(std::move(betas), std::log(space.beta_low), std::log(space.beta_high), bw_ratio),
      ParzenEstimator(std::move(log_cs), std::log(space.c_low), std::log(space.c_high), bw_ratio),
      CategoricalEstimator(l1s, space.l1_ratios.size(), lr_uniform),
      ParzenEstimator(std::move(depths), space.depth_low - 0.5, space.depth_high + 0.5, bw_ratio),
      ParzenEstimator(std::move(splits), space.split_low - 0.5, space.split_high + 0.5, bw_ratio),
      CategoricalEstimator(samples, space.max_samples.size(), rf_uniform),
  };
}

int round_into(double v, int low, int high) {
  return std::clamp(static_cast<int>(std::lround(v)), low, high);
}

}  // namespace

HyperparamPoint RandomSampler::suggest(std::span<const Observation>, Rng& rng) const {
  return sample_random(space_, rng);
}

std::size_t tpe_good_count(std::size_t n, double fraction) {
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-12));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n, 1));
}

ParzenEstimator::ParzenEstimator(std::vector<double> centers, double low, double high, double min_bandwidth_ratio)
    : low_(low), high_(high) {
  if (!(high > low)) throw InvalidInput("Parzen range must be non-empty");
  if (centers.size() < 2) return;
  centers_ = std::move(centers);
  const double range = high - low;
  bandwidth_ = std::max(range / std::sqrt(static_cast<double>(centers_.size())), min_bandwidth_ratio * range);
  mass_.reserve(centers_.size());
  for (double c : centers_) {
    mass_.push_back(normal_cdf((high_ - c) / bandwidth_) - normal_cdf((low_ - c) / bandwidth_));
  }
}

double ParzenEstimator::log_density(double x) const {
  if (x < low_ || x > high_) return kLogZero;
  if (centers_.empty()) return -std::log(high_ - low_);
  constexpr double inv_sqrt_2pi = 0.398942280401432677939946;
  double total = 0.0;
  for (std::size_t k = 0; k < centers_.size(); ++k) {
    const double z = (x - centers_[k]) / bandwidth_;
    total += inv_sqrt_2pi * std::exp(-0.5 * z * z) / (bandwidth_ * mass_[k]);
  }
  return safe_log(total / static_cast<double>(centers_.size()));
}

double ParzenEstimator::sample(Rng& rng) const {
  if (centers_.empty()) return low_ + (high_ - low_) * uniform01(rng);
  std::uniform_int_distribution<std::size_t> pick(0, centers_.size() - 1);
  const double c = centers_[pick(rng)];
  std::normal_distribution<double> noise(0.0, bandwidth_);
  for (int attempt = 0; attempt < 256; ++attempt) {
    const double x = c + noise(rng);
    if (x >= low_ && x <= high_) return x;
  }
  return std::clamp(c, low_, high_);
}

CategoricalEstimator::CategoricalEstimator(const std::vector<std::size_t>& observed, std::size_t n_categories,
                                           bool uniform)
    : probs_(n_categories, 1.0) {
  if (n_categories == 0) throw InvalidInput("categorical dimension needs at least one category");
  if (!uniform) {
    for (std::size_t c : observed) probs_.at(c) += 1.0;
  }
  const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  for (double& p : probs_) p /= total;
}

double CategoricalEstimator::log_prob(std::size_t category) const { return safe_log(probs_.at(category)); }

std::size_t CategoricalEstimator::sample(Rng& rng) const {
  const double u = uniform01(rng);
  double cumulative = 0.0;
  for (std::size_t c = 0; c < probs_.size(); ++c) {
    cumulative += probs_[c];
    if (u < cumulative) return c;
  }
  return probs_.size() - 1;
}

HyperparamPoint TpeSampler::suggest(std::span<const Observation> history, Rng& rng) const {
  if (history.size() < config_.n_startup) return sample_random(space_, rng);

  std::vector<std::size_t> order(history.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sort_key(history[a].objective) > sort_key(history[b].objective);
  });
  const std::size_t n_good = tpe_good_count(history.size(), config_.good_fraction);
  std::vector<const HyperparamPoint*> good;
  std::vector<const HyperparamPoint*> bad;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_good ? good : bad).push_back(&history[order[i]].theta);
  }
  const DensityModel l = build(good, space_, config_.min_bandwidth_ratio);
  const DensityModel g = build(bad, space_, config_.min_bandwidth_ratio);

  HyperparamPoint best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < config_.n_candidates; ++k) {
    HyperparamPoint candidate;
    const std::size_t family = l.family.sample(rng);
    double score = l.family.log_prob(family) - g.family.log_prob(family);

    const double log_beta = l.beta.sample(rng);
    candidate.beta = std::clamp(std::exp(log_beta), space_.beta_low, space_.beta_high);
    score += l.beta.log_density(log_beta) - g.beta.log_density(log_beta);

    if (family == 0) {
      const double log_c = l.log_c.sample(rng);
      const std::size_t l1 = l.l1_ratio.sample(rng);
      LogisticHyperparams lr;
      lr.C = std::clamp(std::exp(log_c), space_.c_low, space_.c_high);
      lr.l1_ratio = space_.l1_ratios[l1];
      candidate.model = lr;
      score += l.log_c.log_density(log_c) - g.log_c.log_density(log_c);
      score += l.l1_ratio.log_prob(l1) - g.l1_ratio.log_prob(l1);
    } else {
      ForestHyperparams rf;
      rf.max_depth = round_into(l.max_depth.sample(rng), space_.depth_low, space_.depth_high);
      rf.min_samples_split = round_into(l.min_split.sample(rng), space_.split_low, space_.split_high);
      const std::size_t ms = l.max_samples.sample(rng);
      rf.max_samples = space_.max_samples[ms];
      rf.n_trees = space_.n_trees;
      candidate.model = rf;
      score += l.max_depth.log_density(rf.max_depth) - g.max_depth.log_density(rf.max_depth);
      score += l.min_split.log_density(rf.min_samples_split) - g.min_split.log_density(rf.min_samples_split);
      score += l.max_samples.log_prob(ms) - g.max_samples.log_prob(ms);
    }
    if (k == 0 || score > best_score) {
      best = candidate;
      best_score = score;
    }
  }
  return best;
}

}  // namespace ciropt
