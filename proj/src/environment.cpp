#include "ciropt/environment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ciropt/error.hpp"
#include "ciropt/random.hpp"

namespace ciropt {

namespace {

constexpr std::uint64_t kParameterStream = 1;
constexpr std::uint64_t kStandardizeStream = 2;
constexpr std::uint64_t kContextStream = 1;
constexpr std::uint64_t kActionStream = 2;

void check_unit_box(std::span<const double> values, const char* name) {
  for (double v : values)
    if (!(v >= -1.0 && v <= 1.0))
      throw InvalidInput(std::string("SyntheticEnvironment: entries of ") + name + " must lie in [-1, 1]");
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

SyntheticEnvironment::SyntheticEnvironment(Matrix interaction, std::vector<double> context_coef,
                                           std::vector<double> action_coef, Matrix embeddings,
                                           std::uint64_t seed, double logit_shift, double logit_scale)
    : interaction_(std::move(interaction)),
      context_coef_(std::move(context_coef)),
      action_coef_(std::move(action_coef)),
      embeddings_(std::move(embeddings)),
      seed_(seed),
      logit_shift_(logit_shift),
      logit_scale_(logit_scale) {
  const std::size_t dx = interaction_.rows();
  const std::size_t de = interaction_.cols();
  if (dx == 0 || de == 0 || embeddings_.rows() == 0)
    throw InvalidInput("SyntheticEnvironment: dimensions must be at least 1");
  if (context_coef_.size() != dx || action_coef_.size() != de || embeddings_.cols() != de)
    throw InvalidInput("SyntheticEnvironment: parameter shapes disagree");
  if (!(logit_scale_ > 0.0) || !std::isfinite(logit_shift_))
    throw InvalidInput("SyntheticEnvironment: logit scale must be positive and shift finite");
  check_unit_box(interaction_.values(), "M");
  check_unit_box(context_coef_, "eta_x");
  check_unit_box(action_coef_, "eta_a");
  check_unit_box(embeddings_.values(), "embeddings");

  const std::size_t na = embeddings_.rows();
  context_action_ = Matrix(dx, na);
  action_bias_.assign(na, 0.0);
  for (std::size_t a = 0; a < na; ++a) {
    auto e = embeddings_.row(a);
    for (std::size_t i = 0; i < dx; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < de; ++j) s += interaction_(i, j) * e[j];
      context_action_(i, a) = s;
    }
    double b = 0.0;
    for (std::size_t j = 0; j < de; ++j) b += action_coef_[j] * e[j];
    action_bias_[a] = b;
  }
}

void SyntheticEnvironment::check_context(std::span<const double> context) const {
  if (context.size() != context_dim()) throw InvalidInput("SyntheticEnvironment: context dimension mismatch");
}

double SyntheticEnvironment::raw_logit(std::span<const double> context, std::size_t action) const {
  check_context(context);
  if (action >= n_actions()) throw InvalidInput("SyntheticEnvironment: action id out of range");
  auto e = embeddings_.row(action);
  double z = 0.0;
  for (std::size_t i = 0; i < context_dim(); ++i) {
    double me = 0.0;
    for (std::size_t j = 0; j < embedding_dim(); ++j) me += interaction_(i, j) * e[j];
    z += context[i] * me + context_coef_[i] * context[i];
  }
  for (std::size_t j = 0; j < embedding_dim(); ++j) z += action_coef_[j] * e[j];
  return z;
}

double SyntheticEnvironment::reward_mean(std::span<const double> context, std::size_t action) const {
  return sigmoid(logit_scale_ * (raw_logit(context, action) - logit_shift_));
}

void SyntheticEnvironment::raw_logits(std::span<const double> context, std::span<double> out) const {
  check_context(context);
  if (out.size() != n_actions()) throw InvalidInput("SyntheticEnvironment: output size mismatch");
  double shared = 0.0;
  for (std::size_t i = 0; i < context_dim(); ++i) shared += context_coef_[i] * context[i];
  for (std::size_t a = 0; a < n_actions(); ++a) out[a] = shared + action_bias_[a];
  for (std::size_t i = 0; i < context_dim(); ++i) {
    const double xi = context[i];
    auto row = context_action_.row(i);
    for (std::size_t a = 0; a < n_actions(); ++a) out[a] += xi * row[a];
  }
}

void SyntheticEnvironment::reward_means(std::span<const double> context, std::span<double> out) const {
  raw_logits(context, out);
  for (double& z : out) z = sigmoid(logit_scale_ * (z - logit_shift_));
}

SyntheticEnvironment sample_environment(std::uint64_t seed, std::size_t context_dim, std::size_t embedding_dim,
                                        std::size_t n_actions, const EnvironmentOptions& options) {
  if (context_dim == 0 || embedding_dim == 0 || n_actions == 0)
    throw InvalidInput("sample_environment: dimensions must be at least 1");
  Rng rng = make_rng(derive_seed(seed, kParameterStream));
  auto draw = [&rng] { return 2.0 * uniform01(rng) - 1.0; };

  Matrix interaction(context_dim, embedding_dim);
  for (double& v : interaction.values()) v = draw();
  std::vector<double> context_coef(context_dim);
  for (double& v : context_coef) v = draw();
  std::vector<double> action_coef(embedding_dim);
  for (double& v : action_coef) v = draw();
  Matrix embeddings(n_actions, embedding_dim);
  for (double& v : embeddings.values()) v = draw();

  SyntheticEnvironment raw(interaction, context_coef, action_coef, embeddings, seed);
  if (!options.standardize_logits || options.standardization_contexts == 0) return raw;

  // z-score the logits over a reference pool (mean and population std over all context-action pairs)
  const Matrix pool = sample_contexts(context_dim, options.standardization_contexts,
                                      derive_seed(seed, kStandardizeStream));
  std::vector<double> logits(n_actions);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t r = 0; r < pool.rows(); ++r) {
    for (std::size_t a = 0; a < n_actions; ++a) logits[a] = raw.raw_logit(pool.row(r), a);
    for (double z : logits) {
      sum += z;
      sum_sq += z * z;
    }
  }
  const double count = static_cast<double>(pool.rows() * n_actions);
  const double mean = sum / count;
  const double var = std::max(sum_sq / count - mean * mean, 0.0);
  if (!(var > 0.0)) return raw;
  return SyntheticEnvironment(std::move(interaction), std::move(context_coef), std::move(action_coef),
                              std::move(embeddings), seed, mean, 1.0 / std::sqrt(var));
}

PolicyPtr softmax_logging_policy(const SyntheticEnvironment& env, double beta0) {
  return softmax_policy(std::make_shared<SyntheticEnvironment>(env), beta0);
}

PolicyPtr optimal_policy(const SyntheticEnvironment& env) {
  return greedy_policy(std::make_shared<SyntheticEnvironment>(env));
}

Matrix sample_contexts(std::size_t context_dim, std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(n, context_dim);
  for (double& v : out.values()) v = normal(rng);
  return out;
}

LoggedDataset sample_logged_data(const SyntheticEnvironment& env, const Policy& policy, std::size_t n,
                                 std::uint64_t seed) {
  if (n == 0) throw InvalidInput("sample_logged_data: n must be at least 1");
  if (policy.n_actions() != env.n_actions())
    throw InvalidInput("sample_logged_data: policy and environment disagree on the number of actions");
  Matrix contexts = sample_contexts(env.context_dim(), n, derive_seed(seed, kContextStream));
  Rng rng = make_rng(derive_seed(seed, kActionStream));

  const std::size_t na = env.n_actions();
  std::vector<std::size_t> actions(n);
  std::vector<double> rewards(n);
  std::vector<double> propensities(n);
  std::vector<double> probs(na);
  for (std::size_t i = 0; i < n; ++i) {
    auto x = contexts.row(i);
    policy.action_probs(x, probs);
    double total = 0.0;
    for (double p : probs) total += p;
    if (!(total > 0.0)) throw InvalidPolicy("sample_logged_data: policy assigns no mass to any action");

    const double u = uniform01(rng) * total;
    std::size_t chosen = na;
    double cum = 0.0;
    for (std::size_t a = 0; a < na; ++a) {
      cum += probs[a];
      if (cum > u) {
        chosen = a;
        break;
      }
    }
    if (chosen == na) {
      for (std::size_t a = na; a-- > 0;)
        if (probs[a] > 0.0) {
          chosen = a;
          break;
        }
    }
    actions[i] = chosen;
    propensities[i] = probs[chosen];
    rewards[i] = uniform01(rng) < env.reward_mean(x, chosen) ? 1.0 : 0.0;
  }
  return LoggedDataset(std::move(contexts), std::move(actions), std::move(rewards), std::move(propensities), na,
                       env.r_max());
}

GroundTruth::GroundTruth(const SyntheticEnvironment& env, std::size_t n_test, std::uint64_t seed)
    : contexts_(sample_contexts(env.context_dim(), n_test, seed)), means_(n_test, env.n_actions()) {
  if (n_test == 0) throw InvalidInput("GroundTruth: n_test must be at least 1");
  for (std::size_t i = 0; i < n_test; ++i) env.reward_means(contexts_.row(i), means_.row(i));
}

double GroundTruth::value(const Policy& policy) const {
  if (policy.n_actions() != means_.cols()) throw InvalidInput("GroundTruth::value: action count mismatch");
  std::vector<double> probs(means_.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    policy.action_probs(contexts_.row(i), probs);
    auto mu = means_.row(i);
    double v = 0.0;
    for (std::size_t a = 0; a < probs.size(); ++a) v += probs[a] * mu[a];
    total += v;
  }
  return total / static_cast<double>(size());
}

double GroundTruth::value(const PolicyTable& table) const {
  if (table.rows() != size() || table.n_actions() != means_.cols())
    throw InvalidInput("GroundTruth::value: table shape mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    auto p = table.row(i);
    auto mu = means_.row(i);
    double v = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) v += p[a] * mu[a];
    total += v;
  }
  return total / static_cast<double>(size());
}

double GroundTruth::optimal_value() const {
  double total = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    auto mu = means_.row(i);
    total += *std::max_element(mu.begin(), mu.end());
  }
  return total / static_cast<double>(size());
}

double true_value(const SyntheticEnvironment& env, const Policy& policy, std::size_t n_test, std::uint64_t seed) {
  return GroundTruth(env, n_test, seed).value(policy);
}

double optimal_value(const SyntheticEnvironment& env, std::size_t n_test, std::uint64_t seed) {
  return GroundTruth(env, n_test, seed).optimal_value();
}

}  // namespace ciropt
