#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "ciropt/random.hpp"
#include "ciropt/reward_model.hpp"

namespace ciropt {

/// One point of the conditional search space: the policy's inverse temperature,
/// the reward-model family and that family's hyperparameters.
struct HyperparamPoint {
  double beta = 1.0;
  std::variant<LogisticHyperparams, ForestHyperparams> model;

  ModelFamily family() const {
    return std::holds_alternative<LogisticHyperparams>(model) ? ModelFamily::LogisticRegression
                                                              : ModelFamily::RandomForest;
  }
  const LogisticHyperparams* logistic() const { return std::get_if<LogisticHyperparams>(&model); }
  const ForestHyperparams* forest() const { return std::get_if<ForestHyperparams>(&model); }
};

bool operator==(const HyperparamPoint& a, const HyperparamPoint& b);

/// beta in [0.01, 100] (log scale); model in {LR, RF};
/// LR: C in [1e-3, 1e3] (log scale), l1_ratio in {0.1, ..., 0.9};
/// RF: max_depth, min_samples_split in {2, ..., 32}, max_samples in {0.1, ..., 0.9}.
struct SearchSpace {
  double beta_low = 0.01;
  double beta_high = 100.0;
  double c_low = 1e-3;
  double c_high = 1e3;
  std::vector<double> l1_ratios = tenths();
  int depth_low = 2;
  int depth_high = 32;
  int split_low = 2;
  int split_high = 32;
  std::vector<double> max_samples = tenths();
  int n_trees = 10;

  bool contains(const HyperparamPoint& point) const;

  static std::vector<double> tenths() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}; }
};

/// beta and C log-uniform, integers and categoricals uniform; only the drawn
/// family's block is populated.
HyperparamPoint sample_random(const SearchSpace& space, Rng& rng);

/// Fit the reward model described by `point` on `train`.
RewardModelPtr fit_reward_model(const HyperparamPoint& point, const LoggedDataset& train, std::uint64_t seed);

}  // namespace ciropt
