#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ciropt/dataset.hpp"
#include "ciropt/matrix.hpp"
#include "ciropt/policy.hpp"

namespace ciropt {

/// Synthetic contextual bandit with Bernoulli rewards of mean
///
///   mu(x, a) = sigmoid(scale * (x' M e_a + eta_x' x + eta_a' e_a - shift)).
///
/// shift and scale default to 0 and 1 (the plain logistic model). sample_environment
/// z-scores the logits over a reference pool of contexts, which keeps the
/// reward spread independent of the dimensions.
class SyntheticEnvironment final : public ActionScorer {
 public:
  SyntheticEnvironment(Matrix interaction, std::vector<double> context_coef, std::vector<double> action_coef,
                       Matrix embeddings, std::uint64_t seed = 0, double logit_shift = 0.0,
                       double logit_scale = 1.0);

  std::size_t context_dim() const { return interaction_.rows(); }
  std::size_t embedding_dim() const { return interaction_.cols(); }
  std::size_t n_actions() const override { return embeddings_.rows(); }
  double r_max() const { return 1.0; }
  std::uint64_t seed() const { return seed_; }

  const Matrix& interaction() const { return interaction_; }
  const std::vector<double>& context_coef() const { return context_coef_; }
  const std::vector<double>& action_coef() const { return action_coef_; }
  const Matrix& embeddings() const { return embeddings_; }
  double logit_shift() const { return logit_shift_; }
  double logit_scale() const { return logit_scale_; }

  /// Raw logit x' M e_a + eta_x' x + eta_a' e_a, before standardisation.
  double raw_logit(std::span<const double> context, std::size_t action) const;
  double reward_mean(std::span<const double> context, std::size_t action) const;
  void reward_means(std::span<const double> context, std::span<double> out) const;
  void score_actions(std::span<const double> context, std::span<double> out) const override {
    reward_means(context, out);
  }

 private:
  void raw_logits(std::span<const double> context, std::span<double> out) const;
  void check_context(std::span<const double> context) const;

  Matrix interaction_;
  std::vector<double> context_coef_;
  std::vector<double> action_coef_;
  Matrix embeddings_;
  std::uint64_t seed_;
  double logit_shift_;
  double logit_scale_;
  // M * E' (context_dim x n_actions) and eta_a' e_a per action.
  Matrix context_action_;
  std::vector<double> action_bias_;
};

struct EnvironmentOptions {
  bool standardize_logits = true;
  std::size_t standardization_contexts = 10000;
};

double sigmoid(double z);

/// Parameters i.i.d. Uniform[-1, 1], deterministic in seed.
SyntheticEnvironment sample_environment(std::uint64_t seed, std::size_t context_dim = 10,
                                        std::size_t embedding_dim = 10, std::size_t n_actions = 10,
                                        const EnvironmentOptions& options = {});

/// pi_0(a|x) proportional to exp(beta0 * mu(x, a)).
PolicyPtr softmax_logging_policy(const SyntheticEnvironment& env, double beta0);

/// argmax_a mu(x, a), ties to the lowest action id.
PolicyPtr optimal_policy(const SyntheticEnvironment& env);

/// n i.i.d. standard normal contexts.
Matrix sample_contexts(std::size_t context_dim, std::size_t n, std::uint64_t seed);

/// Contexts ~ N(0, I), actions ~ policy, rewards ~ Bernoulli(mu). Propensities store policy(a_i|x_i).
LoggedDataset sample_logged_data(const SyntheticEnvironment& env, const Policy& policy, std::size_t n,
                                 std::uint64_t seed);

/// Fixed pool of test contexts with the exact reward means cached. Values are
/// exact over actions and rewards, Monte Carlo over contexts.
class GroundTruth {
 public:
  GroundTruth(const SyntheticEnvironment& env, std::size_t n_test, std::uint64_t seed);

  std::size_t size() const { return contexts_.rows(); }
  const Matrix& contexts() const { return contexts_; }
  const Matrix& reward_means() const { return means_; }

  double value(const Policy& policy) const;
  double value(const PolicyTable& table) const;
  double optimal_value() const;

 private:
  Matrix contexts_;
  Matrix means_;
};

double true_value(const SyntheticEnvironment& env, const Policy& policy, std::size_t n_test = 100000,
                  std::uint64_t seed = 0);
double optimal_value(const SyntheticEnvironment& env, std::size_t n_test = 100000, std::uint64_t seed = 0);

}  // namespace ciropt
