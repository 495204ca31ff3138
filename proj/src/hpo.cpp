#include "ciropt/hpo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ciropt/error.hpp"
#include "ciropt/estimators.hpp"
#include "ciropt/random.hpp"
#include "ciropt/student_t.hpp"

namespace ciropt {

namespace {

constexpr std::uint64_t kSamplerStream = 11;
constexpr std::uint64_t kFitStream = 12;

struct Procedure {
  bool cso = false;
  bool air = false;
  IncumbentRule rule = IncumbentRule::StrictlyGreater;
  double delta = 0.1;
  double gamma = 0.01;
  double alpha_init = 0.5;
  bool start_from_logging = true;
};

PolicyTable softmax_table(const Matrix& predictions, double beta) {
  Matrix probs(predictions.rows(), predictions.cols());
  std::vector<double> row(predictions.cols());
  for (std::size_t i = 0; i < predictions.rows(); ++i) {
    const auto src = predictions.row(i);
    for (std::size_t a = 0; a < row.size(); ++a) row[a] = src[a] * beta;
    softmax_inplace(row);
    std::copy(row.begin(), row.end(), probs.row(i).begin());
  }
  return PolicyTable(std::move(probs));
}

int score_from_test(const PairedTest& test, double threshold) {
  if (!(test.t_statistic >= threshold)) return 0;
  return test.mean_delta >= 0.0 ? 1 : -1;
}

double two_sided_threshold(double delta, std::size_t n) {
  return t_quantile(1.0 - delta / 2.0, static_cast<double>(n - 1));
}

void validate(const HpoProblem& problem, const HpoOptions& options) {
  if (options.trials < 1) throw InvalidInput("HPO needs at least one trial");
  if (problem.train.size() == 0 || problem.val.size() == 0) throw InvalidInput("HPO needs non-empty datasets");
  if (!problem.logging) throw InvalidInput("HPO needs a logging policy");
  if (problem.logging_on_val.rows() != problem.val.size() ||
      problem.logging_on_val.n_actions() != problem.val.n_actions())
    throw InvalidInput("logging table does not match the validation set");
  if (problem.train.n_actions() != problem.val.n_actions()) throw InvalidInput("train and val disagree on actions");
}

HpoResult run(const Sampler& sampler, const HpoProblem& problem, const HpoOptions& options, const Procedure& proc) {
  validate(problem, options);
  const LoggedDataset& val = problem.val;
  const std::size_t n = val.size();
  const bool bounded = n >= 2;
  if ((proc.cso || proc.air) && !bounded) throw InvalidInput("CIR-HPO needs at least two validation samples");

  HpoResult result;
  result.best_policy = problem.logging;

  const EstimateTerms logging_terms = ips(problem.logging_on_val, val);
  result.logging.v_ips_val = logging_terms.mean;
  result.logging.objective =
      proc.cso ? lower_bound_ttest(logging_terms, proc.delta).lower_bound : logging_terms.mean;
  if (options.oracle) result.logging.v_true = options.oracle(*problem.logging);

  AirState air(proc.alpha_init, proc.gamma, proc.delta, options.trials);
  const double threshold = proc.air ? two_sided_threshold(proc.delta, n) : 0.0;

  Rng rng = make_rng(derive_seed(options.seed, kSamplerStream));
  std::vector<Observation> history;
  history.reserve(options.trials);
  result.trials.reserve(options.trials);
  double incumbent = proc.start_from_logging ? result.logging.objective : -std::numeric_limits<double>::infinity();

  for (std::size_t t = 1; t <= options.trials; ++t) {
    TrialRecord rec;
    rec.t = t;
    rec.theta = sampler.suggest(history, rng);
    const RewardModelPtr model = fit_reward_model(rec.theta, problem.train, derive_seed(options.seed, kFitStream, t));
    const Matrix predictions = predict_table(*model, val.contexts());
    const PolicyTable candidate = softmax_table(predictions, rec.theta.beta);

    if (proc.air) {
      rec.s_t = score_from_test(paired_t_statistic(problem.logging_on_val, candidate, val), threshold);
      air.add(rec.s_t);
      rec.alpha_t = air_alpha(air, t);
    }
    const PolicyTable mixed = rec.alpha_t == 0.0 ? candidate : mix(candidate, problem.logging_on_val, rec.alpha_t);

    const EstimateTerms ips_terms = ips(mixed, val);
    const EstimateTerms surrogate =
        options.surrogate == Surrogate::Dr ? dr(mixed, val, predictions) : ips_terms;
    rec.v_ips_val = ips_terms.mean;
    rec.v_lower_val = bounded ? lower_bound_ttest(surrogate, proc.delta).lower_bound : surrogate.mean;
    rec.objective = proc.cso ? rec.v_lower_val : surrogate.mean;

    PolicyPtr pi_hat = softmax_policy(model, rec.theta.beta);
    if (options.oracle) {
      if (rec.alpha_t == 1.0) {
        rec.v_true = result.logging.v_true;
      } else {
        const double v_hat = options.oracle(*pi_hat);
        rec.v_true = rec.alpha_t == 0.0 ? v_hat
                                        : (1.0 - rec.alpha_t) * v_hat + rec.alpha_t * *result.logging.v_true;
      }
    }

    rec.incumbent = proc.rule == IncumbentRule::StrictlyGreater ? rec.objective > incumbent
                                                                : rec.objective >= incumbent;
    if (rec.incumbent) {
      incumbent = rec.objective;
      result.best_theta = rec.theta;
      result.best_trial = result.trials.size();
      result.best_alpha = rec.alpha_t;
      result.best_policy =
          rec.alpha_t == 0.0 ? std::move(pi_hat) : mixture_policy(std::move(pi_hat), problem.logging, rec.alpha_t);
    }
    history.push_back(rec.observation());
    result.trials.push_back(std::move(rec));
  }
  return result;
}

}  // namespace

std::string_view to_string(Surrogate surrogate) { return surrogate == Surrogate::Dr ? "dr" : "ips"; }

AirState::AirState(double alpha_init, double gamma, double delta, std::size_t budget)
    : alpha_init_(alpha_init), gamma_(gamma), delta_(delta), budget_(budget) {
  if (!(alpha_init >= 0.0 && alpha_init <= 1.0)) throw InvalidInput("alpha_init must lie in [0, 1]");
  if (!(gamma > 0.0)) throw InvalidInput("gamma must be positive");
  if (budget == 0) throw InvalidInput("trial budget must be positive");
}

void AirState::add(int score) {
  if (score < -1 || score > 1) throw InvalidInput("AIR score must be -1, 0 or 1");
  sum_ += score;
  ++count_;
}

double air_alpha(const AirState& state, std::size_t t) {
  if (t < 1 || t > state.budget()) throw InvalidInput("air_alpha: t must lie in [1, T]");
  if (state.score_sum() == 0) return state.alpha_init();
  const double progress = std::pow(static_cast<double>(t) / static_cast<double>(state.budget()), state.gamma());
  const double alpha = state.alpha_init() + (1.0 - state.alpha_init()) * progress *
                                                static_cast<double>(state.score_sum()) / static_cast<double>(t);
  return std::clamp(alpha, 0.0, 1.0);
}

int air_score(const PolicyTable& pi_0, const PolicyTable& candidate, const LoggedDataset& val, double delta) {
  if (val.size() < 2) throw InvalidInput("air_score needs at least two samples");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("air_score: delta must lie in (0, 1)");
  return score_from_test(paired_t_statistic(pi_0, candidate, val), two_sided_threshold(delta, val.size()));
}

int air_score(const Policy& pi_0, const Policy& candidate, const LoggedDataset& val, double delta) {
  return air_score(tabulate(pi_0, val.contexts()), tabulate(candidate, val.contexts()), val, delta);
}

HpoResult baseline_hpo(const Sampler& sampler, const HpoProblem& problem, const HpoOptions& options) {
  return run(sampler, problem, options, Procedure{});
}

HpoResult cir_hpo(const Sampler& sampler, const HpoProblem& problem, const HpoOptions& options,
                  const CirOptions& cir) {
  if (!(cir.delta > 0.0 && cir.delta <= 0.5)) throw InvalidInput("CIR-HPO: delta must lie in (0, 0.5]");
  Procedure proc;
  proc.cso = cir.enable_cso;
  proc.air = cir.enable_air;
  proc.rule = cir.rule;
  proc.delta = cir.delta;
  proc.gamma = cir.gamma;
  proc.alpha_init = cir.alpha_init;
  proc.start_from_logging = cir.start_from_logging;
  if (!(cir.gamma > 0.0)) throw InvalidInput("CIR-HPO: gamma must be positive");
  if (!(cir.alpha_init >= 0.0 && cir.alpha_init <= 1.0)) throw InvalidInput("CIR-HPO: alpha_init must lie in [0, 1]");
  return run(sampler, problem, options, proc);
}

}  // namespace ciropt
