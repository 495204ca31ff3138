#include "ciropt/search_space.hpp"

#include <algorithm>
#include <cmath>

namespace ciropt {

namespace {

bool listed(const std::vector<double>& values, double v) {
  return std::find(values.begin(), values.end(), v) != values.end();
}

double log_uniform(double low, double high, Rng& rng) {
  const double lo = std::log(low);
  const double hi = std::log(high);
  return std::exp(lo + (hi - lo) * uniform01(rng));
}

int uniform_int(int low, int high, Rng& rng) {
  std::uniform_int_distribution<int> dist(low, high);
  return dist(rng);
}

double pick(const std::vector<double>& values, Rng& rng) {
  std::uniform_int_distribution<std::size_t> dist(0, values.size() - 1);
  return values[dist(rng)];
}

}  // namespace

bool operator==(const HyperparamPoint& a, const HyperparamPoint& b) {
  if (a.beta != b.beta || a.family() != b.family()) return false;
  if (const auto* la = a.logistic()) {
    const auto* lb = b.logistic();
    return la->C == lb->C && la->l1_ratio == lb->l1_ratio;
  }
  const auto* fa = a.forest();
  const auto* fb = b.forest();
  return fa->max_depth == fb->max_depth && fa->min_samples_split == fb->min_samples_split &&
         fa->max_samples == fb->max_samples && fa->n_trees == fb->n_trees;
}

bool SearchSpace::contains(const HyperparamPoint& point) const {
  if (!(point.beta >= beta_low && point.beta <= beta_high)) return false;
  if (const auto* lr = point.logistic()) return lr->C >= c_low && lr->C <= c_high && listed(l1_ratios, lr->l1_ratio);
  const auto* rf = point.forest();
  return rf->max_depth >= depth_low && rf->max_depth <= depth_high && rf->min_samples_split >= split_low &&
         rf->min_samples_split <= split_high && listed(max_samples, rf->max_samples);
}

HyperparamPoint sample_random(const SearchSpace& space, Rng& rng) {
  HyperparamPoint point;
  point.beta = log_uniform(space.beta_low, space.beta_high, rng);
  if (uniform01(rng) < 0.5) {
    LogisticHyperparams lr;
    lr.C = log_uniform(space.c_low, space.c_high, rng);
    lr.l1_ratio = pick(space.l1_ratios, rng);
    point.model = lr;
  } else {
    ForestHyperparams rf;
    rf.max_depth = uniform_int(space.depth_low, space.depth_high, rng);
    rf.min_samples_split = uniform_int(space.split_low, space.split_high, rng);
    rf.max_samples = pick(space.max_samples, rng);
    rf.n_trees = space.n_trees;
    point.model = rf;
  }
  return point;
}

RewardModelPtr fit_reward_model(const HyperparamPoint& point, const LoggedDataset& train, std::uint64_t seed) {
  if (const auto* lr = point.logistic()) return fit_logistic(train, *lr, seed);
  return fit_forest(train, *point.forest(), seed);
}

}  // namespace ciropt
