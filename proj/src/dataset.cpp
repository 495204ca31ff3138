#include "ciropt/dataset.hpp"

#include <string>

#include "ciropt/error.hpp"

namespace ciropt {

LoggedDataset::LoggedDataset(Matrix contexts, std::vector<std::size_t> actions, std::vector<double> rewards,
                             std::vector<double> propensities, std::size_t n_actions, double r_max)
    : contexts_(std::move(contexts)),
      actions_(std::move(actions)),
      rewards_(std::move(rewards)),
      propensities_(std::move(propensities)),
      n_actions_(n_actions),
      r_max_(r_max) {
  const std::size_t n = actions_.size();
  if (contexts_.rows() != n || rewards_.size() != n || propensities_.size() != n)
    throw InvalidInput("LoggedDataset: column lengths disagree");
  if (n_actions_ == 0) throw InvalidInput("LoggedDataset: need at least one action");
  if (!(r_max_ > 0.0)) throw InvalidInput("LoggedDataset: r_max must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    if (actions_[i] >= n_actions_)
      throw InvalidInput("LoggedDataset: action id out of range at row " + std::to_string(i));
    if (!(propensities_[i] > 0.0 && propensities_[i] <= 1.0))
      throw InvalidInput("LoggedDataset: propensity outside (0, 1] at row " + std::to_string(i));
    if (!(rewards_[i] >= 0.0 && rewards_[i] <= r_max_))
      throw InvalidInput("LoggedDataset: reward outside [0, r_max] at row " + std::to_string(i));
  }
}

LoggedDataset LoggedDataset::subset(std::span<const std::size_t> rows) const {
  Matrix ctx(rows.size(), context_dim());
  std::vector<std::size_t> acts(rows.size());
  std::vector<double> rew(rows.size());
  std::vector<double> prop(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows[k];
    if (i >= size()) throw InvalidInput("LoggedDataset::subset: row index out of range");
    auto src = context(i);
    std::copy(src.begin(), src.end(), ctx.row(k).begin());
    acts[k] = actions_[i];
    rew[k] = rewards_[i];
    prop[k] = propensities_[i];
  }
  return LoggedDataset(std::move(ctx), std::move(acts), std::move(rew), std::move(prop), n_actions_, r_max_);
}

}  // namespace ciropt
