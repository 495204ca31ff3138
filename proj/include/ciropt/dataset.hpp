#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ciropt/matrix.hpp"

namespace ciropt {

/// Logged bandit feedback: n rows of (context, action, reward, logging propensity).
///
/// Invariants, checked on construction: every propensity lies in (0, 1],
/// every reward in [0, r_max] and every action id below n_actions.
class LoggedDataset {
 public:
  LoggedDataset() = default;
  LoggedDataset(Matrix contexts, std::vector<std::size_t> actions, std::vector<double> rewards,
                std::vector<double> propensities, std::size_t n_actions, double r_max = 1.0);

  std::size_t size() const { return actions_.size(); }
  bool empty() const { return actions_.empty(); }
  std::size_t context_dim() const { return contexts_.cols(); }
  std::size_t n_actions() const { return n_actions_; }
  double r_max() const { return r_max_; }

  std::span<const double> context(std::size_t i) const { return contexts_.row(i); }
  std::size_t action(std::size_t i) const { return actions_[i]; }
  double reward(std::size_t i) const { return rewards_[i]; }
  double propensity(std::size_t i) const { return propensities_[i]; }

  const Matrix& contexts() const { return contexts_; }
  const std::vector<std::size_t>& actions() const { return actions_; }
  const std::vector<double>& rewards() const { return rewards_; }
  const std::vector<double>& propensities() const { return propensities_; }

  /// Rows in the given order (duplicates allowed).
  LoggedDataset subset(std::span<const std::size_t> rows) const;

  bool operator==(const LoggedDataset&) const = default;

 private:
  Matrix contexts_;
  std::vector<std::size_t> actions_;
  std::vector<double> rewards_;
  std::vector<double> propensities_;
  std::size_t n_actions_ = 0;
  double r_max_ = 1.0;
};

}  // namespace ciropt
