#include <doctest.h>

#include <cmath>

#include "ciropt/environment.hpp"
#include "ciropt/error.hpp"

using namespace ciropt;

namespace {

SyntheticEnvironment zero_env(std::size_t dx, std::size_t de, std::size_t na) {
  return SyntheticEnvironment(Matrix(dx, de), std::vector<double>(dx), std::vector<double>(de), Matrix(na, de));
}

}  // namespace

TEST_CASE("sample_environment is deterministic in the seed") {
  const auto a = sample_environment(42);
  const auto b = sample_environment(42);
  CHECK(a.interaction() == b.interaction());
  CHECK(a.embeddings() == b.embeddings());
  CHECK(a.context_coef() == b.context_coef());
  CHECK(a.action_coef() == b.action_coef());
  CHECK(a.logit_shift() == b.logit_shift());
  CHECK(a.logit_scale() == b.logit_scale());
  const auto c = sample_environment(43);
  CHECK_FALSE(a.interaction() == c.interaction());
}

TEST_CASE("sample_environment shapes and parameter range") {
  const auto env = sample_environment(0, 1, 1, 2);
  CHECK(env.interaction().rows() == 1);
  CHECK(env.interaction().cols() == 1);
  CHECK(env.embeddings().rows() == 2);
  CHECK(env.embeddings().cols() == 1);

  const auto big = sample_environment(7, 10, 10, 10);
  auto in_range = [](std::span<const double> v) {
    for (double x : v)
      if (x < -1.0 || x > 1.0) return false;
    return true;
  };
  CHECK(in_range(big.interaction().values()));
  CHECK(in_range(big.embeddings().values()));
  CHECK(in_range(big.context_coef()));
  CHECK(in_range(big.action_coef()));
}

TEST_CASE("reward_mean") {
  const auto env = zero_env(3, 2, 4);
  const std::vector<double> x(3, 0.0);
  CHECK(env.reward_mean(x, 0) == 0.5);
  CHECK(sigmoid(1.0) == doctest::Approx(0.7310585786).epsilon(1e-10));

  // x' M e_a = 1 with x = e_0, M(0,0) = 1, e_a = e_0.
  Matrix m(1, 1);
  m(0, 0) = 1.0;
  Matrix e(1, 1);
  e(0, 0) = 1.0;
  const SyntheticEnvironment one(m, {0.0}, {0.0}, e);
  const std::vector<double> unit{1.0};
  CHECK(one.reward_mean(unit, 0) == doctest::Approx(0.7310585786).epsilon(1e-10));

  CHECK_THROWS_AS(env.reward_mean(std::vector<double>(2, 0.0), 0), InvalidInput);
  CHECK_THROWS_AS(env.reward_mean(x, 4), InvalidInput);
}

TEST_CASE("reward means stay inside (0, 1)") {
  const auto env = sample_environment(3);
  const Matrix xs = sample_contexts(env.context_dim(), 500, 9);
  std::vector<double> mu(env.n_actions());
  for (std::size_t i = 0; i < xs.rows(); ++i) {
    env.reward_means(xs.row(i), mu);
    for (std::size_t a = 0; a < mu.size(); ++a) {
      CHECK(mu[a] > 0.0);
      CHECK(mu[a] < 1.0);
      CHECK(mu[a] == doctest::Approx(env.reward_mean(xs.row(i), a)).epsilon(1e-14));
    }
  }
}

TEST_CASE("invalid parameters are rejected") {
  Matrix m(1, 1);
  m(0, 0) = 1.5;
  CHECK_THROWS_AS(SyntheticEnvironment(m, {0.0}, {0.0}, Matrix(2, 1)), InvalidInput);
  CHECK_THROWS_AS(SyntheticEnvironment(Matrix(1, 1), {0.0, 0.0}, {0.0}, Matrix(2, 1)), InvalidInput);
}

TEST_CASE("softmax logging policy") {
  const auto env = sample_environment(5);
  const Matrix xs = sample_contexts(env.context_dim(), 200, 1);
  for (double beta0 : {-3.0, 0.0, 3.0, 20.0}) {
    const auto pi0 = softmax_logging_policy(env, beta0);
    for (std::size_t i = 0; i < xs.rows(); ++i) {
      const auto p = pi0->action_probs(xs.row(i));
      double total = 0.0;
      for (double v : p) total += v;
      CHECK(std::abs(total - 1.0) < 1e-12);
      if (beta0 == 0.0)
        for (double v : p) CHECK(v == doctest::Approx(0.1).epsilon(1e-14));
    }
  }
}

TEST_CASE("sample_logged_data") {
  const auto env = sample_environment(11);
  const auto pi0 = softmax_logging_policy(env, 3.0);
  const auto a = sample_logged_data(env, *pi0, 300, 5);
  const auto b = sample_logged_data(env, *pi0, 300, 5);
  CHECK(a == b);
  CHECK(a.size() == 300);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.propensity(i) == doctest::Approx(pi0->action_probs(a.context(i))[a.action(i)]).epsilon(1e-15));
    CHECK((a.reward(i) == 0.0 || a.reward(i) == 1.0));
  }
  const auto c = sample_logged_data(env, *pi0, 300, 6);
  CHECK_FALSE(a == c);
}

TEST_CASE("zero-mass policy is rejected") {
  struct Dead final : Policy {
    std::size_t n_actions() const override { return 10; }
    void action_probs(std::span<const double>, std::span<double> out) const override {
      for (double& v : out) v = 0.0;
    }
    std::string describe() const override { return "dead"; }
  };
  const auto env = sample_environment(1);
  CHECK_THROWS_AS(sample_logged_data(env, Dead{}, 10, 0), InvalidPolicy);
}

TEST_CASE("ground truth") {
  const auto env = sample_environment(2);
  const GroundTruth truth(env, 5000, 3);
  const double v_star = truth.optimal_value();
  CHECK(truth.value(*optimal_policy(env)) == v_star);
  CHECK(true_value(env, *optimal_policy(env), 5000, 3) == optimal_value(env, 5000, 3));
  for (double beta0 : {-3.0, 0.0, 3.0, 20.0}) CHECK(truth.value(*softmax_logging_policy(env, beta0)) <= v_star);
  // Uniform policy value is the pool average of the mean reward.
  double mean = 0.0;
  for (double v : truth.reward_means().values()) mean += v;
  mean /= static_cast<double>(truth.reward_means().values().size());
  CHECK(truth.value(*uniform_policy(env.n_actions())) == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("policy value increases with the logging temperature") {
  const auto env = sample_environment(4);
  const GroundTruth truth(env, 5000, 0);
  double previous = -1.0;
  for (double beta0 : {-3.0, 0.0, 3.0, 10.0, 20.0}) {
    const double v = truth.value(*softmax_logging_policy(env, beta0));
    CHECK(v > previous);
    previous = v;
  }
}
