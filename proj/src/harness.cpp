#include "ciropt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <utility>

#include "ciropt/csv.hpp"
#include "ciropt/error.hpp"
#include "ciropt/random.hpp"
#include "ciropt/sampler.hpp"

namespace ciropt {

namespace {

constexpr std::uint64_t kEnvStream = 1;
constexpr std::uint64_t kTrainStream = 2;
constexpr std::uint64_t kValStream = 3;
constexpr std::uint64_t kTruthStream = 4;
constexpr std::uint64_t kHpoStream = 5;
constexpr std::uint64_t kGridStream = 6;
constexpr std::uint64_t kFitStream = 7;

std::string bool_field(bool b) { return b ? "1" : "0"; }

std::unique_ptr<Sampler> make_sampler(SamplerKind kind) {
  if (kind == SamplerKind::Random) return std::make_unique<RandomSampler>();
  return std::make_unique<TpeSampler>();
}

SyntheticEnvironment make_environment(const ExperimentConfig& config, std::uint64_t seed) {
  return sample_environment(seed, config.context_dim, config.embedding_dim, config.n_actions);
}

double sample_sd(const std::vector<double>& values, double mean) {
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double standard_error(const std::vector<double>& values) {
  if (values.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return sample_sd(values, mean_of(values)) / std::sqrt(static_cast<double>(values.size()));
}

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidInput(message);
}

}  // namespace

std::string_view to_string(Algo algo) {
  switch (algo) {
    case Algo::Baseline:
      return "baseline";
    case Algo::Cir:
      return "cir";
    case Algo::CirNoCso:
      return "cir-no-cso";
    case Algo::CirNoAir:
      return "cir-no-air";
  }
  return "?";
}

std::string_view to_string(SamplerKind kind) { return kind == SamplerKind::Random ? "random" : "tpe"; }

Algo parse_algo(std::string_view text) {
  for (Algo a : {Algo::Baseline, Algo::Cir, Algo::CirNoCso, Algo::CirNoAir}) {
    if (to_string(a) == text) return a;
  }
  throw InvalidInput("unknown algo '" + std::string(text) + "' (baseline, cir, cir-no-cso, cir-no-air)");
}

SamplerKind parse_sampler(std::string_view text) {
  if (text == "random") return SamplerKind::Random;
  if (text == "tpe") return SamplerKind::Tpe;
  throw InvalidInput("unknown sampler '" + std::string(text) + "' (random, tpe)");
}

Surrogate parse_surrogate(std::string_view text) {
  if (text == "ips") return Surrogate::Ips;
  if (text == "dr") return Surrogate::Dr;
  throw InvalidInput("unknown estimator '" + std::string(text) + "' (ips, dr)");
}

void validate_config(const ExperimentConfig& c) {
  require(!c.beta0.empty(), "beta0 list is empty");
  for (double b : c.beta0) require(std::isfinite(b), "beta0 must be finite");
  require(!c.algos.empty(), "algo list is empty");
  require(c.trials >= 1, "trials must be >= 1");
  require(c.n_train >= 2, "n-train must be >= 2");
  require(c.n_val >= 2, "n-val must be >= 2");
  require(c.seeds >= 1, "seeds must be >= 1");
  require(c.delta > 0.0 && c.delta <= 0.5, "delta must lie in (0, 0.5]");
  require(c.gamma > 0.0 && std::isfinite(c.gamma), "gamma must be positive");
  require(c.alpha_init >= 0.0 && c.alpha_init <= 1.0, "alpha-init must lie in [0, 1]");
  require(c.n_test >= 1, "n-test must be >= 1");
  require(c.workers >= 1, "workers must be >= 1");
  require(c.context_dim >= 1 && c.embedding_dim >= 1, "dimensions must be >= 1");
  require(c.n_actions >= 2, "n-actions must be >= 2");
  require(!c.n_grid.empty(), "n list is empty");
  for (std::size_t n : c.n_grid) require(n >= 2, "every n must be >= 2");
  require(c.reps >= 1, "reps must be >= 1");
  require(c.eval_beta >= 0.0 && std::isfinite(c.eval_beta), "eval-beta must be finite and >= 0");
  require(c.env_seeds >= 1, "env-seeds must be >= 1");
  require(c.grid_size >= 1, "grid-size must be >= 1");
}

RunSeeds run_seeds(std::uint64_t run_seed, std::uint64_t first_seed, bool fix_env) {
  const std::uint64_t world = fix_env ? first_seed : run_seed;
  return {derive_seed(world, kEnvStream), derive_seed(run_seed, kTrainStream), derive_seed(run_seed, kValStream),
          derive_seed(world, kTruthStream), derive_seed(run_seed, kHpoStream)};
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

MeanCi mean_ci(const std::vector<double>& values) {
  if (values.empty()) throw InvalidInput("mean_ci: no values");
  return {mean_of(values), 1.96 * standard_error(values)};
}

RunOutcome run_single_hpo(const ExperimentConfig& config, Algo algo, double beta0, std::uint64_t run_seed) {
  const RunSeeds seeds = run_seeds(run_seed, config.seed, config.fix_env);
  const SyntheticEnvironment env = make_environment(config, seeds.environment);
  const PolicyPtr logging = softmax_logging_policy(env, beta0);
  const LoggedDataset train = sample_logged_data(env, *logging, config.n_train, seeds.train);
  const LoggedDataset val = sample_logged_data(env, *logging, config.n_val, seeds.val);
  const GroundTruth truth(env, config.n_test, seeds.truth);

  const HpoProblem problem{train, val, logging, tabulate(*logging, val.contexts())};
  HpoOptions options;
  options.trials = config.trials;
  options.surrogate = config.estimator;
  options.seed = seeds.hpo;
  options.oracle = [&truth](const Policy& p) { return truth.value(p); };
  const auto sampler = make_sampler(config.sampler);

  HpoResult result;
  if (algo == Algo::Baseline) {
    result = baseline_hpo(*sampler, problem, options);
  } else {
    CirOptions cir;
    cir.delta = config.delta;
    cir.gamma = config.gamma;
    cir.alpha_init = config.alpha_init;
    cir.enable_cso = algo != Algo::CirNoCso;
    cir.enable_air = algo != Algo::CirNoAir;
    result = cir_hpo(*sampler, problem, options, cir);
  }

  RunOutcome out;
  out.algo = algo;
  out.beta0 = beta0;
  out.seed = run_seed;
  out.v_pi0 = *result.logging.v_true;
  out.v_hat_pi0 = result.logging.v_ips_val;
  out.trials = std::move(result.trials);
  out.keeps_logging_policy = result.keeps_logging_policy();
  out.final_alpha = out.trials.empty() ? 0.0 : out.trials.back().alpha_t;

  double inc_val = out.v_hat_pi0;
  double inc_gen = out.v_pi0;
  bool at_logging = true;
  out.norm_val.reserve(out.trials.size());
  out.norm_gen.reserve(out.trials.size());
  for (const TrialRecord& rec : out.trials) {
    if (rec.incumbent) {
      inc_val = rec.v_ips_val;
      inc_gen = *rec.v_true;
      at_logging = false;
    }
    out.norm_val.push_back(inc_val / out.v_pi0);
    out.norm_gen.push_back(at_logging ? 1.0 : inc_gen / out.v_pi0);
  }

  std::vector<GridPoint> grid;
  grid.reserve(out.trials.size() + 1);
  grid.push_back({out.v_pi0, out.v_hat_pi0});
  for (const TrialRecord& rec : out.trials) grid.push_back({*rec.v_true, rec.v_ips_val});
  const std::size_t chosen = result.best_trial ? *result.best_trial + 1 : 0;
  out.regret = regret_report(grid, chosen);
  return out;
}

HpoExperiment execute_hpo_experiment(const ExperimentConfig& config) {
  validate_config(config);
  const std::size_t n_cells = config.algos.size() * config.beta0.size();
  const std::size_t n_jobs = n_cells * config.seeds;
  HpoExperiment result;
  result.runs.resize(n_jobs);
  parallel_for(n_jobs, config.workers, [&](std::size_t job) {
    const std::size_t k = job % config.seeds;
    const std::size_t cell = job / config.seeds;
    const Algo algo = config.algos[cell / config.beta0.size()];
    const double beta0 = config.beta0[cell % config.beta0.size()];
    RunOutcome run = run_single_hpo(config, algo, beta0, config.seed + k);
    run.run_id = job;
    result.runs[job] = std::move(run);
  });

  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    const std::size_t first = cell * config.seeds;
    for (std::size_t t = 0; t < config.trials; ++t) {
      std::vector<double> val;
      std::vector<double> gen;
      for (std::size_t k = 0; k < config.seeds; ++k) {
        val.push_back(result.runs[first + k].norm_val[t]);
        gen.push_back(result.runs[first + k].norm_gen[t]);
      }
      const MeanCi v = mean_ci(val);
      const MeanCi g = mean_ci(gen);
      result.summary.push_back({result.runs[first].algo, result.runs[first].beta0, t + 1, v.mean, v.half_width,
                                g.mean, g.half_width});
    }
  }
  return result;
}

const std::vector<std::string> kTrialsColumns{
    "run_id",    "seed",     "algo",      "sampler",     "estimator",         "beta0",       "trial",     "model_family",
    "beta",      "C",        "l1_ratio",  "max_depth",   "min_samples_split", "max_samples", "objective", "v_ips_val",
    "v_lower_val", "v_true", "tau",       "alpha_t",     "s_t",               "incumbent"};
const std::vector<std::string> kSummaryColumns{"algo",          "beta0",  "trial", "mean_norm_val",
                                               "ci_val",        "mean_norm_gen", "ci_gen"};
const std::vector<std::string> kRegretColumns{"run_id", "seed",  "algo",     "beta0",      "v_pi0",
                                              "r_gen",  "r_val", "delta_tau", "C",         "residual",
                                              "chosen", "best_true", "best_estimated", "final_alpha"};
const std::vector<std::string> kBoundsColumns{"seed",        "beta0",  "n",       "method",  "delta",
                                              "estimate",    "lower_bound", "v_true", "violated"};
const std::vector<std::string> kTableColumns{"beta0", "mean_v_pi0", "se_v_pi0", "mean_ratio", "se_ratio", "env_seeds"};
const std::vector<std::string> kPropsColumns{"rep",      "v_hat_selected", "v_true_selected", "v_true_best",
                                             "residual", "clipped_bias",   "bound",           "violated"};
const std::vector<std::string> kPropsSummaryColumns{"check", "value", "threshold", "pass"};

void write_hpo_outputs(const HpoExperiment& result, const ExperimentConfig& config) {
  CsvWriter trials(config.out / "trials.csv", kTrialsColumns);
  for (const RunOutcome& run : result.runs) {
    for (const TrialRecord& rec : run.trials) {
      std::vector<std::string> row{std::to_string(run.run_id),
                                   std::to_string(run.seed),
                                   std::string(to_string(run.algo)),
                                   std::string(to_string(config.sampler)),
                                   std::string(to_string(config.estimator)),
                                   format_double(run.beta0),
                                   std::to_string(rec.t),
                                   std::string(to_string(rec.theta.family())),
                                   format_double(rec.theta.beta)};
      if (const auto* lr = rec.theta.logistic()) {
        row.insert(row.end(), {format_double(lr->C), format_double(lr->l1_ratio), "", "", ""});
      } else {
        const auto* rf = rec.theta.forest();
        row.insert(row.end(), {"", "", std::to_string(rf->max_depth), std::to_string(rf->min_samples_split),
                               format_double(rf->max_samples)});
      }
      row.insert(row.end(), {format_double(rec.objective), format_double(rec.v_ips_val),
                             format_double(rec.v_lower_val), format_optional(rec.v_true),
                             rec.v_true ? format_double(overestimation_bias(rec.v_ips_val, *rec.v_true)) : "",
                             format_double(rec.alpha_t), std::to_string(rec.s_t), bool_field(rec.incumbent)});
      trials.write_row(row);
    }
  }

  CsvWriter summary(config.out / "summary.csv", kSummaryColumns);
  for (const SummaryRow& s : result.summary) {
    summary.write_row({std::string(to_string(s.algo)), format_double(s.beta0), std::to_string(s.trial),
                       format_double(s.mean_norm_val), format_double(s.ci_val), format_double(s.mean_norm_gen),
                       format_double(s.ci_gen)});
  }

  CsvWriter regret(config.out / "regret.csv", kRegretColumns);
  for (const RunOutcome& run : result.runs) {
    const RegretReport& r = run.regret;
    regret.write_row({std::to_string(run.run_id), std::to_string(run.seed), std::string(to_string(run.algo)),
                      format_double(run.beta0), format_double(run.v_pi0), format_double(r.r_gen),
                      format_double(r.r_val), format_double(r.delta_tau), format_double(r.C),
                      format_double(r.residual), std::to_string(r.chosen), std::to_string(r.best_true),
                      std::to_string(r.best_estimated), format_double(run.final_alpha)});
  }
}

HpoExperiment run_hpo_experiment(const ExperimentConfig& config) {
  HpoExperiment result = execute_hpo_experiment(config);
  write_hpo_outputs(result, config);
  return result;
}

std::vector<BoundsRow> execute_bounds_study(const ExperimentConfig& config) {
  validate_config(config);
  const RunSeeds seeds = run_seeds(config.seed, config.seed, true);
  const SyntheticEnvironment env = make_environment(config, seeds.environment);
  const GroundTruth truth(env, config.n_test, seeds.truth);

  struct Cell {
    PolicyPtr logging;
    PolicyPtr target;
    double v_true;
  };
  std::vector<Cell> cells;
  for (double beta0 : config.beta0) {
    PolicyPtr logging = softmax_logging_policy(env, beta0);
    const LoggedDataset train = sample_logged_data(env, *logging, config.n_train, seeds.train);
    PolicyPtr target = softmax_policy(fit_logistic(train, LogisticHyperparams{}, derive_seed(seeds.train, kFitStream)),
                                      config.eval_beta);
    const double v = truth.value(*target);
    cells.push_back({std::move(logging), std::move(target), v});
  }

  constexpr BoundMethod kMethods[] = {BoundMethod::TTest, BoundMethod::Hoeffding, BoundMethod::Bernstein};
  const std::size_t n_jobs = config.beta0.size() * config.n_grid.size();
  std::vector<std::vector<BoundsRow>> per_job(n_jobs);
  parallel_for(n_jobs, config.workers, [&](std::size_t job) {
    const std::size_t b = job / config.n_grid.size();
    const std::size_t n = config.n_grid[job % config.n_grid.size()];
    const Cell& cell = cells[b];
    for (std::size_t rep = 0; rep < config.reps; ++rep) {
      const LoggedDataset val = sample_logged_data(env, *cell.logging, n, derive_seed(seeds.val, n, rep));
      const PolicyTable target = tabulate(*cell.target, val.contexts());
      const PolicyTable logging = tabulate(*cell.logging, val.contexts());
      const EstimateTerms terms = ips(target, val);
      const double w_max = empirical_w_max(target, logging);
      for (BoundMethod method : kMethods) {
        BoundResult r;
        switch (method) {
          case BoundMethod::TTest:
            r = lower_bound_ttest(terms, config.delta);
            break;
          case BoundMethod::Hoeffding:
            r = lower_bound_hoeffding(terms, config.delta, w_max);
            break;
          case BoundMethod::Bernstein:
            r = lower_bound_bernstein(terms, config.delta, w_max);
            break;
        }
        per_job[job].push_back({rep, config.beta0[b], n, method, config.delta, r.estimate, r.lower_bound,
                                cell.v_true, r.lower_bound > cell.v_true});
      }
    }
  });
  std::vector<BoundsRow> rows;
  for (auto& job : per_job) rows.insert(rows.end(), job.begin(), job.end());
  return rows;
}

std::vector<BoundsRow> run_bounds_study(const ExperimentConfig& config) {
  std::vector<BoundsRow> rows = execute_bounds_study(config);
  CsvWriter out(config.out / "bounds.csv", kBoundsColumns);
  for (const BoundsRow& r : rows) {
    out.write_row({std::to_string(r.rep), format_double(r.beta0), std::to_string(r.n),
                   std::string(to_string(r.method)), format_double(r.delta), format_double(r.estimate),
                   format_double(r.lower_bound), format_double(r.v_true), bool_field(r.violated)});
  }
  return rows;
}

std::vector<OptimalityRow> execute_optimality_table(const ExperimentConfig& config) {
  validate_config(config);
  const std::size_t n_beta = config.beta0.size();
  // values[k][b] = V(pi_0), ratios[k][b] = V(pi_0) / V(pi*) for environment k.
  std::vector<std::vector<double>> values(config.env_seeds, std::vector<double>(n_beta));
  std::vector<std::vector<double>> ratios(config.env_seeds, std::vector<double>(n_beta));
  parallel_for(config.env_seeds, config.workers, [&](std::size_t k) {
    const RunSeeds seeds = run_seeds(config.seed + k, config.seed, false);
    const SyntheticEnvironment env = make_environment(config, seeds.environment);
    const GroundTruth truth(env, config.n_test, seeds.truth);
    const double v_star = truth.optimal_value();
    for (std::size_t b = 0; b < n_beta; ++b) {
      const double v = truth.value(*softmax_logging_policy(env, config.beta0[b]));
      values[k][b] = v;
      ratios[k][b] = v / v_star;
    }
  });
  std::vector<OptimalityRow> rows;
  for (std::size_t b = 0; b < n_beta; ++b) {
    std::vector<double> v;
    std::vector<double> r;
    for (std::size_t k = 0; k < config.env_seeds; ++k) {
      v.push_back(values[k][b]);
      r.push_back(ratios[k][b]);
    }
    rows.push_back({config.beta0[b], mean_of(v), standard_error(v), mean_of(r), standard_error(r), config.env_seeds});
  }
  return rows;
}

std::vector<OptimalityRow> run_optimality_table(const ExperimentConfig& config) {
  std::vector<OptimalityRow> rows = execute_optimality_table(config);
  CsvWriter out(config.out / "table.csv", kTableColumns);
  for (const OptimalityRow& r : rows) {
    out.write_row({format_double(r.beta0), format_double(r.mean_v_pi0), format_double(r.se_v_pi0),
                   format_double(r.mean_ratio), format_double(r.se_ratio), std::to_string(r.env_seeds)});
  }
  return rows;
}

PropChecks execute_prop_checks(const ExperimentConfig& config) {
  validate_config(config);
  const RunSeeds seeds = run_seeds(config.seed, config.seed, true);
  const SyntheticEnvironment env = make_environment(config, seeds.environment);
  const PolicyPtr logging = softmax_logging_policy(env, config.beta0.front());
  const LoggedDataset train = sample_logged_data(env, *logging, config.n_train, seeds.train);
  const GroundTruth truth(env, config.n_test, seeds.truth);

  const SearchSpace space;
  Rng grid_rng = make_rng(derive_seed(config.seed, kGridStream));
  std::vector<PolicyPtr> grid;
  for (std::size_t j = 0; j < config.grid_size; ++j) {
    const HyperparamPoint theta = sample_random(space, grid_rng);
    grid.push_back(softmax_policy(fit_reward_model(theta, train, derive_seed(config.seed, kFitStream, j)), theta.beta));
  }

  // V(theta) and E[V_hat_clip(theta)] = E_x sum_a mu(x, a) min(pi_0(a|x), pi(a|x)) on the truth pool.
  const PolicyTable logging_pool = tabulate(*logging, truth.contexts());
  std::vector<double> v_true(grid.size());
  std::vector<double> clip_mean(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const PolicyTable pool = tabulate(*grid[j], truth.contexts());
    v_true[j] = truth.value(pool);
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      for (std::size_t a = 0; a < env.n_actions(); ++a) {
        sum += truth.reward_means()(i, a) * std::min(pool(i, a), logging_pool(i, a));
      }
    }
    clip_mean[j] = sum / static_cast<double>(truth.size());
  }
  const std::size_t best = static_cast<std::size_t>(std::max_element(v_true.begin(), v_true.end()) - v_true.begin());
  const double max_clip_mean = *std::max_element(clip_mean.begin(), clip_mean.end());
  const double bound = optimism_bound(grid.size(), config.n_val, config.delta);

  const std::size_t n_reps = std::max(config.seeds, config.reps);
  PropChecks result;
  result.rows.resize(n_reps);
  parallel_for(n_reps, config.workers, [&](std::size_t rep) {
    const LoggedDataset val = sample_logged_data(env, *logging, config.n_val, derive_seed(seeds.val, rep));
    std::vector<GridPoint> points(grid.size());
    double max_clip = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const EstimateTerms terms = ips(*grid[j], val);
      points[j] = {v_true[j], terms.mean};
      double clipped = 0.0;
      for (double v : terms.values) clipped += std::clamp(v, 0.0, 1.0);
      max_clip = std::max(max_clip, clipped / static_cast<double>(terms.size()));
    }
    double residual = 0.0;
    std::size_t selected = 0;
    for (std::size_t chosen = 0; chosen < points.size(); ++chosen) {
      const RegretReport r = regret_report(points, chosen);
      residual = std::max(residual, std::abs(r.residual));
      selected = r.best_estimated;
    }
    PropRow& row = result.rows[rep];
    row.rep = rep;
    row.v_hat_selected = points[selected].v_hat;
    row.v_true_selected = points[selected].v_true;
    row.v_true_best = v_true[best];
    row.residual = residual;
    row.clipped_bias = max_clip - max_clip_mean;
    row.bound = bound;
    row.violated = row.clipped_bias > bound;
  });

  PropSummary& s = result.summary;
  std::vector<double> v_hat_sel;
  std::vector<double> v_true_sel;
  for (std::size_t rep = 0; rep < config.seeds; ++rep) {
    v_hat_sel.push_back(result.rows[rep].v_hat_selected);
    v_true_sel.push_back(result.rows[rep].v_true_selected);
  }
  s.sandwich_reps = config.seeds;
  s.v_true_best = v_true[best];
  s.mean_v_hat_selected = mean_of(v_hat_sel);
  s.se_v_hat_selected = standard_error(v_hat_sel);
  s.mean_v_true_selected = mean_of(v_true_sel);
  s.se_v_true_selected = standard_error(v_true_sel);
  const double se_hat = std::isnan(s.se_v_hat_selected) ? 0.0 : s.se_v_hat_selected;
  const double se_true = std::isnan(s.se_v_true_selected) ? 0.0 : s.se_v_true_selected;
  s.upper_holds = s.mean_v_hat_selected >= s.v_true_best - 2.0 * se_hat;
  s.lower_holds = s.v_true_best >= s.mean_v_true_selected - 2.0 * se_true;
  std::size_t violations = 0;
  for (const PropRow& row : result.rows) s.max_residual = std::max(s.max_residual, row.residual);
  for (std::size_t rep = 0; rep < config.reps; ++rep) violations += result.rows[rep].violated ? 1 : 0;
  s.coverage_reps = config.reps;
  s.violation_rate = static_cast<double>(violations) / static_cast<double>(config.reps);
  s.coverage_holds = s.violation_rate <= config.delta;
  return result;
}

PropChecks run_prop_checks(const ExperimentConfig& config) {
  PropChecks result = execute_prop_checks(config);
  {
    CsvWriter out(config.out / "props.csv", kPropsColumns);
    for (const PropRow& r : result.rows) {
      out.write_row({std::to_string(r.rep), format_double(r.v_hat_selected), format_double(r.v_true_selected),
                     format_double(r.v_true_best), format_double(r.residual), format_double(r.clipped_bias),
                     format_double(r.bound), bool_field(r.violated)});
    }
  }
  const PropSummary& s = result.summary;
  CsvWriter out(config.out / "props_summary.csv", kPropsSummaryColumns);
  out.write_row({"sandwich_upper", format_double(s.mean_v_hat_selected),
                 format_double(s.v_true_best - 2.0 * s.se_v_hat_selected), bool_field(s.upper_holds)});
  out.write_row({"sandwich_lower", format_double(s.v_true_best),
                 format_double(s.mean_v_true_selected - 2.0 * s.se_v_true_selected), bool_field(s.lower_holds)});
  out.write_row({"regret_identity", format_double(s.max_residual), format_double(1e-10),
                 bool_field(s.max_residual < 1e-10)});
  out.write_row({"clipped_coverage", format_double(s.violation_rate), format_double(config.delta),
                 bool_field(s.coverage_holds)});
  return result;
}

}  // namespace ciropt
