#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ciropt/environment.hpp"
#include "ciropt/estimators.hpp"
#include "ciropt/hpo.hpp"

namespace ciropt {

enum class Algo { Baseline, Cir, CirNoCso, CirNoAir };
enum class SamplerKind { Random, Tpe };

std::string_view to_string(Algo algo);
std::string_view to_string(SamplerKind kind);
Algo parse_algo(std::string_view text);
SamplerKind parse_sampler(std::string_view text);
Surrogate parse_surrogate(std::string_view text);

/// Settings shared by every experiment kind; each kind reads the fields it needs.
struct ExperimentConfig {
  std::vector<double> beta0{0.0, 3.0, 20.0};
  std::vector<Algo> algos{Algo::Baseline};
  SamplerKind sampler = SamplerKind::Tpe;
  Surrogate estimator = Surrogate::Ips;
  std::size_t trials = 100;
  std::size_t n_train = 1000;
  std::size_t n_val = 1000;
  std::size_t seeds = 5;
  std::uint64_t seed = 0;  // first run seed; runs use seed, seed + 1, ...
  double delta = 0.1;
  double gamma = 0.01;
  double alpha_init = 0.5;
  bool fix_env = false;
  std::size_t n_test = 100000;
  std::size_t workers = 1;
  std::filesystem::path out = "results";

  std::size_t context_dim = 10;
  std::size_t embedding_dim = 10;
  std::size_t n_actions = 10;

  // bounds study
  std::vector<std::size_t> n_grid{400, 800, 1600, 3200, 6400, 12800};
  std::size_t reps = 200;
  double eval_beta = 10.0;

  // optimality table
  std::size_t env_seeds = 25;

  // proposition checks
  std::size_t grid_size = 20;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Throws InvalidInput on the first violated precondition.
void validate_config(const ExperimentConfig& config);

/// Everything one seed of one experiment cell needs, derived from the run seed.
struct RunSeeds {
  std::uint64_t environment;
  std::uint64_t train;
  std::uint64_t val;
  std::uint64_t truth;
  std::uint64_t hpo;
};

RunSeeds run_seeds(std::uint64_t run_seed, std::uint64_t first_seed, bool fix_env);

struct RunOutcome {
  std::size_t run_id = 0;
  Algo algo = Algo::Baseline;
  double beta0 = 0.0;
  std::uint64_t seed = 0;
  double v_pi0 = 0.0;      // V(pi_0), the normalisation divisor
  double v_hat_pi0 = 0.0;  // IPS(pi_0) on D_val
  std::vector<TrialRecord> trials;
  std::vector<double> norm_val;  // incumbent IPS value / V(pi_0) after each trial
  std::vector<double> norm_gen;  // incumbent V / V(pi_0) after each trial
  double final_alpha = 0.0;      // alpha_T (0 without AIR)
  bool keeps_logging_policy = true;
  RegretReport regret;
};

struct SummaryRow {
  Algo algo = Algo::Baseline;
  double beta0 = 0.0;
  std::size_t trial = 0;
  double mean_norm_val = 0.0;
  double ci_val = 0.0;
  double mean_norm_gen = 0.0;
  double ci_gen = 0.0;
};

struct HpoExperiment {
  std::vector<RunOutcome> runs;  // ordered by (algo, beta0, seed)
  std::vector<SummaryRow> summary;
};

/// One HPO run for (algo, beta0, run seed) with ground truth attached.
RunOutcome run_single_hpo(const ExperimentConfig& config, Algo algo, double beta0, std::uint64_t run_seed);

HpoExperiment execute_hpo_experiment(const ExperimentConfig& config);
/// Executes and writes trials.csv, summary.csv and regret.csv under config.out.
HpoExperiment run_hpo_experiment(const ExperimentConfig& config);
void write_hpo_outputs(const HpoExperiment& result, const ExperimentConfig& config);

/// Mean and 1.96 * standard error (sample standard deviation); NaN half-width below two values.
struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;
};
MeanCi mean_ci(const std::vector<double>& values);

struct BoundsRow {
  std::size_t rep = 0;
  double beta0 = 0.0;
  std::size_t n = 0;
  BoundMethod method = BoundMethod::TTest;
  double delta = 0.0;
  double estimate = 0.0;
  double lower_bound = 0.0;
  double v_true = 0.0;
  bool violated = false;
};

std::vector<BoundsRow> execute_bounds_study(const ExperimentConfig& config);
/// Executes and writes bounds.csv.
std::vector<BoundsRow> run_bounds_study(const ExperimentConfig& config);

struct OptimalityRow {
  double beta0 = 0.0;
  double mean_v_pi0 = 0.0;
  double se_v_pi0 = 0.0;
  double mean_ratio = 0.0;
  double se_ratio = 0.0;
  std::size_t env_seeds = 0;
};

std::vector<OptimalityRow> execute_optimality_table(const ExperimentConfig& config);
/// Executes and writes table.csv.
std::vector<OptimalityRow> run_optimality_table(const ExperimentConfig& config);

struct PropRow {
  std::size_t rep = 0;
  double v_hat_selected = 0.0;   // V_hat(theta_hat)
  double v_true_selected = 0.0;  // V(theta_hat)
  double v_true_best = 0.0;      // V(theta*)
  double residual = 0.0;         // regret identity residual
  double clipped_bias = 0.0;     // max V_hat_clip - max E[V_hat_clip]
  double bound = 0.0;
  bool violated = false;
};

struct PropSummary {
  std::size_t sandwich_reps = 0;
  double mean_v_hat_selected = 0.0;
  double se_v_hat_selected = 0.0;
  double v_true_best = 0.0;
  double mean_v_true_selected = 0.0;
  double se_v_true_selected = 0.0;
  bool upper_holds = false;  // mean V_hat(theta_hat) >= V(theta*) - 2 SE
  bool lower_holds = false;  // V(theta*) >= mean V(theta_hat) - 2 SE
  double max_residual = 0.0;
  std::size_t coverage_reps = 0;
  double violation_rate = 0.0;
  bool coverage_holds = false;  // violation rate <= delta
};

struct PropChecks {
  std::vector<PropRow> rows;
  PropSummary summary;
};

/// Finite grid of config.grid_size random hyperparameters on one environment and
/// one training set; replications vary D_val. The sandwich uses the first
/// config.seeds replications, coverage uses config.reps.
PropChecks execute_prop_checks(const ExperimentConfig& config);
/// Executes and writes props.csv and props_summary.csv.
PropChecks run_prop_checks(const ExperimentConfig& config);

/// Runs job(0..count-1) on up to `workers` threads; rethrows the first failure.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job);

extern const std::vector<std::string> kTrialsColumns;
extern const std::vector<std::string> kSummaryColumns;
extern const std::vector<std::string> kRegretColumns;
extern const std::vector<std::string> kBoundsColumns;
extern const std::vector<std::string> kTableColumns;
extern const std::vector<std::string> kPropsColumns;
extern const std::vector<std::string> kPropsSummaryColumns;

}  // namespace ciropt
