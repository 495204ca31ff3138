#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "ciropt/dataset.hpp"
#include "ciropt/policy.hpp"

namespace ciropt {

enum class ModelFamily { LogisticRegression, RandomForest };

std::string_view to_string(ModelFamily family);

struct LogisticHyperparams {
  double C = 1.0;  // inverse regularisation strength
  double l1_ratio = 0.5;
};

struct ForestHyperparams {
  int max_depth = 8;
  int min_samples_split = 2;
  double max_samples = 0.5;
  int n_trees = 10;
};

/// phi(x, a) = concat(x, one_hot(a)).
struct FeatureMap {
  std::size_t context_dim = 0;
  std::size_t n_actions = 0;

  std::size_t dim() const { return context_dim + n_actions; }
  double feature(std::span<const double> context, std::size_t action, std::size_t f) const {
    return f < context_dim ? context[f] : (f - context_dim == action ? 1.0 : 0.0);
  }
};

/// Fitted reward regressor mu_hat(x, a) in [0, 1]. Immutable once built.
class RewardModel : public ActionScorer {
 public:
  explicit RewardModel(FeatureMap map) : map_(map) {}

  virtual ModelFamily family() const = 0;
  const FeatureMap& feature_map() const { return map_; }
  std::size_t context_dim() const { return map_.context_dim; }
  std::size_t n_actions() const override { return map_.n_actions; }

  double predict(std::span<const double> context, std::size_t action) const;
  void score_actions(std::span<const double> context, std::span<double> out) const override;

 protected:
  virtual double predict_unchecked(std::span<const double> context, std::size_t action) const = 0;
  void check_context(std::span<const double> context) const;

 private:
  FeatureMap map_;
};

using RewardModelPtr = std::shared_ptr<const RewardModel>;

class LogisticModel final : public RewardModel {
 public:
  LogisticModel(FeatureMap map, std::vector<double> weights, double intercept);

  ModelFamily family() const override { return ModelFamily::LogisticRegression; }
  const std::vector<double>& weights() const { return weights_; }
  double intercept() const { return intercept_; }
  void score_actions(std::span<const double> context, std::span<double> out) const override;

 protected:
  double predict_unchecked(std::span<const double> context, std::size_t action) const override;

 private:
  std::vector<double> weights_;
  double intercept_;
};

/// Per-epoch record of the elastic-net objective, filled when requested.
struct LogisticFitTrace {
  std::vector<double> objective;  // objective[0] is the starting point
  std::size_t epochs = 0;
  bool converged = false;
};

struct LogisticSolverOptions {
  std::size_t max_epochs = 1000;
  double tolerance = 1e-6;  // max absolute parameter change per epoch
};

/// Elastic-net logistic regression on (phi(x_i, a_i), r_i), solved by proximal gradient.
///
/// Minimises mean log-loss + (1/C) * (l1 * |w|_1 + (1 - l1) * |w|^2 / 2) / n with an
/// unpenalised intercept. Rewards must be binary.
std::shared_ptr<const LogisticModel> fit_logistic(const LoggedDataset& data, const LogisticHyperparams& hp,
                                                  std::uint64_t seed, const LogisticSolverOptions& options = {},
                                                  LogisticFitTrace* trace = nullptr);

/// Elastic-net objective of (weights, intercept) on the dataset.
double logistic_objective(const LoggedDataset& data, const LogisticHyperparams& hp,
                          std::span<const double> weights, double intercept);

/// Binary classification tree over phi features; leaves hold the positive fraction.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    std::size_t count = 0;
  };

  DecisionTree(std::vector<Node> nodes, std::vector<std::size_t> sample_rows)
      : nodes_(std::move(nodes)), sample_rows_(std::move(sample_rows)) {}

  const std::vector<Node>& nodes() const { return nodes_; }
  /// Training rows the tree was grown on.
  const std::vector<std::size_t>& sample_rows() const { return sample_rows_; }
  /// Index of the leaf reached by phi(x, a).
  std::size_t leaf_index(const FeatureMap& map, std::span<const double> context, std::size_t action) const;
  double predict(const FeatureMap& map, std::span<const double> context, std::size_t action) const {
    return nodes_[leaf_index(map, context, action)].value;
  }
  /// Longest root-to-leaf path, in splits.
  int depth() const;

 private:
  std::vector<Node> nodes_;
  std::vector<std::size_t> sample_rows_;
};

class ForestModel final : public RewardModel {
 public:
  ForestModel(FeatureMap map, std::vector<DecisionTree> trees);

  ModelFamily family() const override { return ModelFamily::RandomForest; }
  const std::vector<DecisionTree>& trees() const { return trees_; }
  /// Walks each tree once per context, splitting the action set at one-hot nodes.
  void score_actions(std::span<const double> context, std::span<double> out) const override;

 protected:
  double predict_unchecked(std::span<const double> context, std::size_t action) const override;

 private:
  std::vector<DecisionTree> trees_;
};

/// n_trees Gini trees, each grown on ceil(max_samples * n) rows drawn without replacement.
std::shared_ptr<const ForestModel> fit_forest(const LoggedDataset& data, const ForestHyperparams& hp,
                                              std::uint64_t seed);

}  // namespace ciropt
