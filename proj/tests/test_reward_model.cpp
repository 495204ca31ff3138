#include <doctest.h>

#include <cmath>

#include "ciropt/environment.hpp"
#include "ciropt/error.hpp"
#include "ciropt/reward_model.hpp"

using namespace ciropt;

namespace {

LoggedDataset logged(std::uint64_t seed, std::size_t n, double beta0 = 3.0) {
  const auto env = sample_environment(seed);
  return sample_logged_data(env, *softmax_logging_policy(env, beta0), n, seed + 100);
}

LoggedDataset constant_rewards(const LoggedDataset& base, double r) {
  return LoggedDataset(base.contexts(), base.actions(), std::vector<double>(base.size(), r), base.propensities(),
                       base.n_actions());
}

double sigmoid_ref(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

TEST_CASE("logistic model prediction") {
  const LogisticModel zero(FeatureMap{2, 3}, std::vector<double>(5, 0.0), 0.0);
  const std::vector<double> x{0.3, -1.2};
  for (std::size_t a = 0; a < 3; ++a) CHECK(zero.predict(x, a) == 0.5);
  CHECK_THROWS_AS(zero.predict(std::vector<double>{1.0}, 0), InvalidInput);
  CHECK_THROWS_AS(zero.predict(x, 3), InvalidInput);

  const LogisticModel m(FeatureMap{2, 3}, {0.5, -1.0, 0.2, 0.0, -0.4}, 0.1);
  const double z = 0.5 * 0.3 + (-1.0) * (-1.2) + (-0.4) + 0.1;
  CHECK(m.predict(x, 2) == doctest::Approx(sigmoid_ref(z)).epsilon(1e-14));
  std::vector<double> all(3);
  m.score_actions(x, all);
  for (std::size_t a = 0; a < 3; ++a) CHECK(all[a] == doctest::Approx(m.predict(x, a)).epsilon(1e-14));
}

TEST_CASE("fit_logistic is deterministic and monotone") {
  const auto data = logged(1, 400);
  for (const LogisticHyperparams hp : {LogisticHyperparams{1e-3, 0.1}, LogisticHyperparams{1.0, 0.5},
                                       LogisticHyperparams{1e3, 0.9}}) {
    LogisticFitTrace trace;
    const auto a = fit_logistic(data, hp, 7, {}, &trace);
    const auto b = fit_logistic(data, hp, 7);
    CHECK(a->weights() == b->weights());
    CHECK(a->intercept() == b->intercept());
    REQUIRE(trace.objective.size() >= 2);
    for (std::size_t k = 1; k < trace.objective.size(); ++k) CHECK(trace.objective[k] <= trace.objective[k - 1]);
    CHECK(trace.objective.back() == doctest::Approx(logistic_objective(data, hp, a->weights(), a->intercept())));
  }
}

TEST_CASE("fit_logistic satisfies the elastic-net optimality conditions") {
  const auto data = logged(2, 500);
  const LogisticHyperparams hp{0.5, 0.3};
  const auto model = fit_logistic(data, hp, 0, LogisticSolverOptions{20000, 1e-10});
  const FeatureMap map{data.context_dim(), data.n_actions()};
  const double n = static_cast<double>(data.size());
  const double l1 = hp.l1_ratio / (hp.C * n);
  const double l2 = (1.0 - hp.l1_ratio) / (hp.C * n);
  std::vector<double> grad(map.dim(), 0.0);
  double grad_b = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double p = model->predict(data.context(i), data.action(i));
    const double resid = (p - data.reward(i)) / n;
    for (std::size_t f = 0; f < map.dim(); ++f) grad[f] += resid * map.feature(data.context(i), data.action(i), f);
    grad_b += resid;
  }
  CHECK(std::abs(grad_b) < 1e-6);
  for (std::size_t f = 0; f < map.dim(); ++f) {
    const double w = model->weights()[f];
    const double g = grad[f] + l2 * w;
    if (w == 0.0) {
      CHECK(std::abs(g) <= l1 + 1e-6);
    } else {
      CHECK(std::abs(g + l1 * (w > 0 ? 1.0 : -1.0)) < 1e-6);
    }
  }
}

TEST_CASE("fit_logistic rejects bad input") {
  const auto data = logged(3, 50);
  CHECK_THROWS_AS(fit_logistic(LoggedDataset{}, {}, 0), InvalidInput);
  const LoggedDataset fractional(data.contexts(), data.actions(), std::vector<double>(data.size(), 0.5),
                                 data.propensities(), data.n_actions());
  CHECK_THROWS_AS(fit_logistic(fractional, {}, 0), InvalidInput);
}

TEST_CASE("forest with pure labels predicts the label") {
  const auto base = logged(4, 200);
  const auto ones = fit_forest(constant_rewards(base, 1.0), ForestHyperparams{8, 2, 0.5, 10}, 3);
  const auto zeros = fit_forest(constant_rewards(base, 0.0), ForestHyperparams{8, 2, 0.5, 10}, 3);
  const Matrix xs = sample_contexts(base.context_dim(), 20, 5);
  for (std::size_t i = 0; i < xs.rows(); ++i) {
    for (std::size_t a = 0; a < base.n_actions(); ++a) {
      CHECK(ones->predict(xs.row(i), a) == 1.0);
      CHECK(zeros->predict(xs.row(i), a) == 0.0);
    }
  }
  CHECK_THROWS_AS(fit_forest(LoggedDataset{}, {}, 0), InvalidInput);
}

TEST_CASE("forest leaves hold exact positive fractions of their training rows") {
  const auto data = logged(5, 600);
  const FeatureMap map{data.context_dim(), data.n_actions()};
  for (const ForestHyperparams hp : {ForestHyperparams{2, 2, 0.3, 10}, ForestHyperparams{32, 2, 0.9, 10},
                                     ForestHyperparams{6, 32, 0.5, 10}}) {
    const auto forest = fit_forest(data, hp, 11);
    CHECK(forest->trees().size() == 10);
    for (const auto& tree : forest->trees()) {
      CHECK(tree.sample_rows().size() == static_cast<std::size_t>(std::ceil(hp.max_samples * data.size())));
      CHECK(tree.depth() <= hp.max_depth);
      std::vector<double> positives(tree.nodes().size(), 0.0);
      std::vector<std::size_t> counts(tree.nodes().size(), 0);
      for (std::size_t row : tree.sample_rows()) {
        const std::size_t leaf = tree.leaf_index(map, data.context(row), data.action(row));
        positives[leaf] += data.reward(row);
        ++counts[leaf];
      }
      for (std::size_t k = 0; k < tree.nodes().size(); ++k) {
        const auto& node = tree.nodes()[k];
        if (node.feature >= 0) continue;
        CHECK(counts[k] == node.count);
        if (counts[k] > 0) CHECK(node.value == positives[k] / static_cast<double>(counts[k]));
      }
    }
  }
}

TEST_CASE("forest is deterministic and predictions stay in [0, 1]") {
  const auto data = logged(6, 300);
  const ForestHyperparams hp{10, 4, 0.7, 10};
  const auto a = fit_forest(data, hp, 1);
  const auto b = fit_forest(data, hp, 1);
  const auto lr = fit_logistic(data, {10.0, 0.2}, 1);
  const Matrix xs = sample_contexts(data.context_dim(), 100, 3);
  for (std::size_t i = 0; i < xs.rows(); ++i) {
    for (std::size_t act = 0; act < data.n_actions(); ++act) {
      const double p = a->predict(xs.row(i), act);
      CHECK(p == b->predict(xs.row(i), act));
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
      const double q = lr->predict(xs.row(i), act);
      CHECK(q >= 0.0);
      CHECK(q <= 1.0);
    }
  }
}
