#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ciropt/matrix.hpp"

namespace ciropt {

/// Anything that assigns a real score to every action of a context: the
/// ground-truth reward function or a fitted reward model.
class ActionScorer {
 public:
  virtual ~ActionScorer() = default;
  virtual std::size_t n_actions() const = 0;
  virtual void score_actions(std::span<const double> context, std::span<double> out) const = 0;
};

using ScorerPtr = std::shared_ptr<const ActionScorer>;

/// Conditional action distribution pi(a|x). Implementations are immutable and
/// action_probs is re-entrant.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::size_t n_actions() const = 0;
  virtual void action_probs(std::span<const double> context, std::span<double> out) const = 0;
  virtual std::string describe() const = 0;

  std::vector<double> action_probs(std::span<const double> context) const;
};

using PolicyPtr = std::shared_ptr<const Policy>;

/// In-place softmax with max subtraction.
void softmax_inplace(std::span<double> logits);

/// pi(a|x) proportional to exp(beta * score(x, a)).
PolicyPtr softmax_policy(ScorerPtr scorer, double beta);

/// (1 - alpha) * pi_hat + alpha * pi_0. Throws InvalidInput unless alpha is in [0, 1].
PolicyPtr mixture_policy(PolicyPtr pi_hat, PolicyPtr pi_0, double alpha);

PolicyPtr uniform_policy(std::size_t n_actions);

/// Deterministic argmax of the scorer; ties go to the lowest action id.
PolicyPtr greedy_policy(ScorerPtr scorer);

/// Context-free policy with a fixed probability vector (normalised on construction).
PolicyPtr tabular_policy(std::vector<double> probs);

/// A policy's probabilities tabulated over a fixed list of contexts (rows).
class PolicyTable {
 public:
  PolicyTable() = default;
  explicit PolicyTable(Matrix probs) : probs_(std::move(probs)) {}

  std::size_t rows() const { return probs_.rows(); }
  std::size_t n_actions() const { return probs_.cols(); }
  double operator()(std::size_t row, std::size_t action) const { return probs_(row, action); }
  std::span<const double> row(std::size_t r) const { return probs_.row(r); }
  const Matrix& probs() const { return probs_; }

 private:
  Matrix probs_;
};

PolicyTable tabulate(const Policy& policy, const Matrix& contexts);

/// Row-wise (1 - alpha) * pi_hat + alpha * pi_0 on tables over the same contexts.
PolicyTable mix(const PolicyTable& pi_hat, const PolicyTable& pi_0, double alpha);

}  // namespace ciropt
