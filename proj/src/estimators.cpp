#include "ciropt/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ciropt/error.hpp"

namespace ciropt {

namespace {

void check_table(const PolicyTable& table, const LoggedDataset& data, const char* who) {
  if (table.rows() != data.size() || table.n_actions() != data.n_actions())
    throw InvalidInput(std::string(who) + ": policy table does not match the dataset");
}

void check_delta(double delta, const char* who) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput(std::string(who) + ": delta must lie in (0, 1)");
}

double logged_propensity(const LoggedDataset& data, std::size_t i) {
  const double p = data.propensity(i);
  if (!(p > 0.0)) throw InvalidInput("zero logging propensity violates full support");
  return p;
}

}  // namespace

EstimateTerms make_terms(std::vector<double> values) {
  EstimateTerms terms;
  terms.mean = values.empty() ? 0.0 : std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  terms.values = std::move(values);
  return terms;
}

double variance(const EstimateTerms& terms) {
  if (terms.size() < 2) throw InvalidInput("variance: need at least two terms");
  double total = 0.0;
  for (double v : terms.values) total += (v - terms.mean) * (v - terms.mean);
  return total / static_cast<double>(terms.size());
}

EstimateTerms ips(const PolicyTable& target, const LoggedDataset& data) {
  check_table(target, data, "ips");
  std::vector<double> v(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    v[i] = target(i, data.action(i)) / logged_propensity(data, i) * data.reward(i);
  return make_terms(std::move(v));
}

EstimateTerms ips(const Policy& target, const LoggedDataset& data) {
  return ips(tabulate(target, data.contexts()), data);
}

double snips(const PolicyTable& target, const LoggedDataset& data) {
  check_table(target, data, "snips");
  double weighted = 0.0;
  double weights = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double w = target(i, data.action(i)) / logged_propensity(data, i);
    weighted += w * data.reward(i);
    weights += w;
  }
  if (!(weights > 0.0)) throw UndefinedEstimate("snips: importance weights sum to zero");
  return weighted / weights;
}

double snips(const Policy& target, const LoggedDataset& data) {
  return snips(tabulate(target, data.contexts()), data);
}

EstimateTerms dr(const PolicyTable& target, const LoggedDataset& data, const Matrix& predictions) {
  check_table(target, data, "dr");
  if (predictions.rows() != data.size() || predictions.cols() != data.n_actions())
    throw InvalidInput("dr: prediction table does not match the dataset");
  std::vector<double> v(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto pi = target.row(i);
    auto mu = predictions.row(i);
    double direct = 0.0;
    for (std::size_t a = 0; a < pi.size(); ++a) direct += pi[a] * mu[a];
    const std::size_t a = data.action(i);
    const double w = pi[a] / logged_propensity(data, i);
    v[i] = direct + w * (data.reward(i) - mu[a]);
  }
  return make_terms(std::move(v));
}

EstimateTerms dr(const Policy& target, const LoggedDataset& data, const RewardModel& model) {
  return dr(tabulate(target, data.contexts()), data, predict_table(model, data.contexts()));
}

Matrix predict_table(const ActionScorer& model, const Matrix& contexts) {
  Matrix out(contexts.rows(), model.n_actions());
  for (std::size_t i = 0; i < contexts.rows(); ++i) model.score_actions(contexts.row(i), out.row(i));
  return out;
}

std::string_view to_string(BoundMethod method) {
  switch (method) {
    case BoundMethod::TTest:
      return "ttest";
    case BoundMethod::Hoeffding:
      return "hoeffding";
    case BoundMethod::Bernstein:
      return "bernstein";
  }
  return "unknown";
}

BoundResult lower_bound_ttest(const EstimateTerms& terms, double delta) {
  check_delta(delta, "lower_bound_ttest");
  const double s2 = variance(terms);
  const double n = static_cast<double>(terms.size());
  BoundResult out;
  out.estimate = terms.mean;
  out.penalty = s2 > 0.0 ? t_quantile(1.0 - delta, n - 1.0) * std::sqrt(s2 / (n - 1.0)) : 0.0;
  out.lower_bound = out.estimate - out.penalty;
  out.method = BoundMethod::TTest;
  out.delta = delta;
  out.n = terms.size();
  return out;
}

BoundResult lower_bound_hoeffding(const EstimateTerms& terms, double delta, double w_max) {
  check_delta(delta, "lower_bound_hoeffding");
  if (!(w_max > 0.0)) throw InvalidInput("lower_bound_hoeffding: w_max must be positive");
  if (terms.size() == 0) throw InvalidInput("lower_bound_hoeffding: no terms");
  const double n = static_cast<double>(terms.size());
  BoundResult out;
  out.estimate = terms.mean;
  out.penalty = w_max * std::sqrt(2.0 * std::log(2.0 / delta) / n);
  out.lower_bound = out.estimate - out.penalty;
  out.method = BoundMethod::Hoeffding;
  out.delta = delta;
  out.n = terms.size();
  out.w_max = w_max;
  return out;
}

BoundResult lower_bound_bernstein(const EstimateTerms& terms, double delta, double w_max) {
  check_delta(delta, "lower_bound_bernstein");
  if (!(w_max > 0.0)) throw InvalidInput("lower_bound_bernstein: w_max must be positive");
  const double s2 = variance(terms);
  const double n = static_cast<double>(terms.size());
  const double log_term = std::log(2.0 / delta);
  BoundResult out;
  out.estimate = terms.mean;
  out.penalty = std::sqrt(2.0 * log_term * s2 / (n - 1.0)) + 7.0 * w_max * log_term / (3.0 * (n - 1.0));
  out.lower_bound = out.estimate - out.penalty;
  out.method = BoundMethod::Bernstein;
  out.delta = delta;
  out.n = terms.size();
  out.w_max = w_max;
  return out;
}

double empirical_w_max(const PolicyTable& target, const PolicyTable& logging) {
  if (target.rows() != logging.rows() || target.n_actions() != logging.n_actions())
    throw InvalidInput("empirical_w_max: tables have different shapes");
  if (target.rows() == 0) throw InvalidInput("empirical_w_max: empty dataset");
  double best = 0.0;
  for (std::size_t i = 0; i < target.rows(); ++i)
    for (std::size_t a = 0; a < target.n_actions(); ++a) {
      const double p0 = logging(i, a);
      if (!(p0 > 0.0)) throw InvalidInput("empirical_w_max: logging policy has zero probability");
      best = std::max(best, target(i, a) / p0);
    }
  return best;
}

double empirical_w_max(const Policy& target, const Policy& logging, const LoggedDataset& data) {
  return empirical_w_max(tabulate(target, data.contexts()), tabulate(logging, data.contexts()));
}

double empirical_w_max(const PolicyTable& target, const LoggedDataset& data) {
  check_table(target, data, "empirical_w_max");
  if (data.empty()) throw InvalidInput("empirical_w_max: empty dataset");
  double best = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    best = std::max(best, target(i, data.action(i)) / logged_propensity(data, i));
  return best;
}

PairedTest paired_t_statistic(std::span<const double> deltas) {
  if (deltas.size() < 2) throw InvalidInput("paired_t_statistic: need at least two samples");
  const EstimateTerms terms = make_terms({deltas.begin(), deltas.end()});
  const double s2 = variance(terms);
  const double n = static_cast<double>(terms.size());
  PairedTest out;
  out.mean_delta = terms.mean;
  if (s2 > 0.0)
    out.t_statistic = std::abs(terms.mean) / std::sqrt(s2 / (n - 1.0));
  else
    out.t_statistic = terms.mean != 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return out;
}

PairedTest paired_t_statistic(const PolicyTable& pi1, const PolicyTable& pi2, const LoggedDataset& data) {
  check_table(pi1, data, "paired_t_statistic");
  check_table(pi2, data, "paired_t_statistic");
  std::vector<double> deltas(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t a = data.action(i);
    deltas[i] = (pi1(i, a) - pi2(i, a)) / logged_propensity(data, i) * data.reward(i);
  }
  return paired_t_statistic(deltas);
}

PairedTest paired_t_statistic(const Policy& pi1, const Policy& pi2, const LoggedDataset& data) {
  return paired_t_statistic(tabulate(pi1, data.contexts()), tabulate(pi2, data.contexts()), data);
}

double overestimation_bias(double value_hat, double value_true) { return value_hat - value_true; }

RegretReport regret_report(std::span<const GridPoint> grid, std::size_t chosen) {
  if (grid.empty()) throw InvalidInput("regret_report: empty grid");
  if (chosen >= grid.size()) throw InvalidInput("regret_report: chosen point is not in the grid");
  RegretReport out;
  out.chosen = chosen;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (grid[k].v_true > grid[out.best_true].v_true) out.best_true = k;
    if (grid[k].v_hat > grid[out.best_estimated].v_hat) out.best_estimated = k;
  }
  const GridPoint& star = grid[out.best_true];
  const GridPoint& star_hat = grid[out.best_estimated];
  const GridPoint& pick = grid[chosen];
  out.r_gen = star.v_true - pick.v_true;
  out.r_val = star_hat.v_hat - pick.v_hat;
  out.delta_tau = overestimation_bias(pick.v_hat, pick.v_true) - overestimation_bias(star.v_hat, star.v_true);
  out.C = star.v_hat - star_hat.v_hat;
  out.residual = out.r_gen - (out.r_val + out.delta_tau + out.C);
  return out;
}

double optimism_bound(std::size_t theta_count, std::size_t n, double delta) {
  if (theta_count == 0 || n == 0) throw InvalidInput("optimism_bound: theta_count and n must be positive");
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidInput("optimism_bound: delta must lie in (0, 1]");
  return std::sqrt(std::log(static_cast<double>(theta_count) / delta) / (2.0 * static_cast<double>(n)));
}

}  // namespace ciropt
