#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ciropt/dataset.hpp"
#include "ciropt/matrix.hpp"
#include "ciropt/policy.hpp"
#include "ciropt/reward_model.hpp"
#include "ciropt/student_t.hpp"

namespace ciropt {

/// Per-sample terms v_i of a mean-type estimator and their mean.
struct EstimateTerms {
  std::vector<double> values;
  double mean = 0.0;

  std::size_t size() const { return values.size(); }
};

EstimateTerms make_terms(std::vector<double> values);

/// Population variance (1/n) sum (v_i - mean)^2. Requires n >= 2.
double variance(const EstimateTerms& terms);

// Importance-weighted estimators. Table overloads take the target policy
// tabulated over the dataset's contexts (row i <-> sample i).

/// v_i = pi(a_i|x_i) / pi_0(a_i|x_i) * r_i.
EstimateTerms ips(const PolicyTable& target, const LoggedDataset& data);
EstimateTerms ips(const Policy& target, const LoggedDataset& data);

/// sum w_i r_i / sum w_i. Throws UndefinedEstimate when every weight is zero.
double snips(const PolicyTable& target, const LoggedDataset& data);
double snips(const Policy& target, const LoggedDataset& data);

/// v_i = mu_hat(x_i, pi) + w_i (r_i - mu_hat(x_i, a_i)); predictions is n x |A|.
EstimateTerms dr(const PolicyTable& target, const LoggedDataset& data, const Matrix& predictions);
EstimateTerms dr(const Policy& target, const LoggedDataset& data, const RewardModel& model);

/// mu_hat over every (context, action) of the dataset.
Matrix predict_table(const ActionScorer& model, const Matrix& contexts);

enum class BoundMethod { TTest, Hoeffding, Bernstein };

std::string_view to_string(BoundMethod method);

struct BoundResult {
  double estimate = 0.0;
  double penalty = 0.0;
  double lower_bound = 0.0;
  BoundMethod method = BoundMethod::TTest;
  double delta = 0.0;
  std::size_t n = 0;
  std::optional<double> w_max;
};

/// estimate - t_{1-delta, n-1} * sqrt(S^2 / (n - 1)).
BoundResult lower_bound_ttest(const EstimateTerms& terms, double delta);

/// estimate - w_max * sqrt(2 log(2/delta) / n).
BoundResult lower_bound_hoeffding(const EstimateTerms& terms, double delta, double w_max);

/// estimate - sqrt(2 log(2/delta) S^2 / (n - 1)) - 7 w_max log(2/delta) / (3 (n - 1)).
BoundResult lower_bound_bernstein(const EstimateTerms& terms, double delta, double w_max);

/// Max of pi(a|x) / pi_0(a|x) over every dataset context and every action
/// (both policies known everywhere).
double empirical_w_max(const PolicyTable& target, const PolicyTable& logging);
double empirical_w_max(const Policy& target, const Policy& logging, const LoggedDataset& data);

/// Max importance weight over the logged (x_i, a_i) pairs only.
double empirical_w_max(const PolicyTable& target, const LoggedDataset& data);

struct PairedTest {
  double t_statistic = 0.0;  // +inf when the differences are constant and non-zero
  double mean_delta = 0.0;
};

/// Paired t statistic over per-sample differences.
PairedTest paired_t_statistic(std::span<const double> deltas);

/// Delta_i = (pi1(a_i|x_i) - pi2(a_i|x_i)) / pi_0(a_i|x_i) * r_i.
PairedTest paired_t_statistic(const PolicyTable& pi1, const PolicyTable& pi2, const LoggedDataset& data);
PairedTest paired_t_statistic(const Policy& pi1, const Policy& pi2, const LoggedDataset& data);

/// tau = V_hat - V.
double overestimation_bias(double value_hat, double value_true);

struct GridPoint {
  double v_true = 0.0;
  double v_hat = 0.0;
};

/// Generalisation / validation regret bookkeeping for a finite set of evaluated
/// points. `residual` is r_gen - (r_val + delta_tau + C), zero up to rounding.
struct RegretReport {
  double r_gen = 0.0;
  double r_val = 0.0;
  double delta_tau = 0.0;
  double C = 0.0;
  double residual = 0.0;
  std::size_t best_true = 0;       // theta*
  std::size_t best_estimated = 0;  // theta_hat*
  std::size_t chosen = 0;
};

RegretReport regret_report(std::span<const GridPoint> grid, std::size_t chosen);

/// sqrt(log(theta_count / delta) / (2n)).
double optimism_bound(std::size_t theta_count, std::size_t n, double delta);

}  // namespace ciropt
