#include "ciropt/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ciropt/error.hpp"

namespace ciropt {

std::vector<double> Policy::action_probs(std::span<const double> context) const {
  std::vector<double> out(n_actions());
  action_probs(context, out);
  return out;
}

void softmax_inplace(std::span<double> logits) {
  if (logits.empty()) return;
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& v : logits) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : logits) v /= total;
}

namespace {

class SoftmaxPolicy final : public Policy {
 public:
  SoftmaxPolicy(ScorerPtr scorer, double beta) : scorer_(std::move(scorer)), beta_(beta) {}

  std::size_t n_actions() const override { return scorer_->n_actions(); }

  void action_probs(std::span<const double> context, std::span<double> out) const override {
    scorer_->score_actions(context, out);
    for (double& v : out) v *= beta_;
    softmax_inplace(out);
  }

  std::string describe() const override {
    std::ostringstream os;
    os << "softmax(beta=" << beta_ << ")";
    return os.str();
  }

 private:
  ScorerPtr scorer_;
  double beta_;
};

class MixturePolicy final : public Policy {
 public:
  MixturePolicy(PolicyPtr pi_hat, PolicyPtr pi_0, double alpha)
      : pi_hat_(std::move(pi_hat)), pi_0_(std::move(pi_0)), alpha_(alpha) {}

  std::size_t n_actions() const override { return pi_hat_->n_actions(); }

  void action_probs(std::span<const double> context, std::span<double> out) const override {
    if (alpha_ == 0.0) {
      pi_hat_->action_probs(context, out);
      return;
    }
    if (alpha_ == 1.0) {
      pi_0_->action_probs(context, out);
      return;
    }
    std::vector<double> base(out.size());
    pi_hat_->action_probs(context, out);
    pi_0_->action_probs(context, base);
    for (std::size_t a = 0; a < out.size(); ++a) out[a] = (1.0 - alpha_) * out[a] + alpha_ * base[a];
  }

  std::string describe() const override {
    std::ostringstream os;
    os << "mixture(alpha=" << alpha_ << ", " << pi_hat_->describe() << ", " << pi_0_->describe() << ")";
    return os.str();
  }

 private:
  PolicyPtr pi_hat_;
  PolicyPtr pi_0_;
  double alpha_;
};

class UniformPolicy final : public Policy {
 public:
  explicit UniformPolicy(std::size_t n) : n_(n) {}
  std::size_t n_actions() const override { return n_; }
  void action_probs(std::span<const double>, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n_));
  }
  std::string describe() const override { return "uniform"; }

 private:
  std::size_t n_;
};

class GreedyPolicy final : public Policy {
 public:
  explicit GreedyPolicy(ScorerPtr scorer) : scorer_(std::move(scorer)) {}
  std::size_t n_actions() const override { return scorer_->n_actions(); }
  void action_probs(std::span<const double> context, std::span<double> out) const override {
    scorer_->score_actions(context, out);
    const auto best = static_cast<std::size_t>(std::max_element(out.begin(), out.end()) - out.begin());
    std::fill(out.begin(), out.end(), 0.0);
    out[best] = 1.0;
  }
  std::string describe() const override { return "greedy"; }

 private:
  ScorerPtr scorer_;
};

class TabularPolicy final : public Policy {
 public:
  explicit TabularPolicy(std::vector<double> probs) : probs_(std::move(probs)) {}
  std::size_t n_actions() const override { return probs_.size(); }
  void action_probs(std::span<const double>, std::span<double> out) const override {
    std::copy(probs_.begin(), probs_.end(), out.begin());
  }
  std::string describe() const override { return "tabular"; }

 private:
  std::vector<double> probs_;
};

}  // namespace

PolicyPtr softmax_policy(ScorerPtr scorer, double beta) {
  if (!scorer) throw InvalidInput("softmax_policy: null scorer");
  return std::make_shared<SoftmaxPolicy>(std::move(scorer), beta);
}

PolicyPtr mixture_policy(PolicyPtr pi_hat, PolicyPtr pi_0, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("mixture_policy: alpha must lie in [0, 1]");
  if (!pi_hat || !pi_0) throw InvalidInput("mixture_policy: null component");
  if (pi_hat->n_actions() != pi_0->n_actions())
    throw InvalidInput("mixture_policy: components disagree on the number of actions");
  return std::make_shared<MixturePolicy>(std::move(pi_hat), std::move(pi_0), alpha);
}

PolicyPtr uniform_policy(std::size_t n_actions) {
  if (n_actions == 0) throw InvalidInput("uniform_policy: need at least one action");
  return std::make_shared<UniformPolicy>(n_actions);
}

PolicyPtr greedy_policy(ScorerPtr scorer) {
  if (!scorer) throw InvalidInput("greedy_policy: null scorer");
  return std::make_shared<GreedyPolicy>(std::move(scorer));
}

PolicyPtr tabular_policy(std::vector<double> probs) {
  if (probs.empty()) throw InvalidInput("tabular_policy: empty probability vector");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw InvalidInput("tabular_policy: negative probability");
    total += p;
  }
  if (!(total > 0.0)) throw InvalidPolicy("tabular_policy: zero total mass");
  for (double& p : probs) p /= total;
  return std::make_shared<TabularPolicy>(std::move(probs));
}

PolicyTable tabulate(const Policy& policy, const Matrix& contexts) {
  Matrix probs(contexts.rows(), policy.n_actions());
  for (std::size_t i = 0; i < contexts.rows(); ++i) policy.action_probs(contexts.row(i), probs.row(i));
  return PolicyTable(std::move(probs));
}

PolicyTable mix(const PolicyTable& pi_hat, const PolicyTable& pi_0, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidInput("mix: alpha must lie in [0, 1]");
  if (pi_hat.rows() != pi_0.rows() || pi_hat.n_actions() != pi_0.n_actions())
    throw InvalidInput("mix: tables have different shapes");
  if (alpha == 0.0) return pi_hat;
  if (alpha == 1.0) return pi_0;
  Matrix out(pi_hat.rows(), pi_hat.n_actions());
  auto dst = out.values();
  auto a = pi_hat.probs().values();
  auto b = pi_0.probs().values();
  for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = (1.0 - alpha) * a[k] + alpha * b[k];
  return PolicyTable(std::move(out));
}

}  // namespace ciropt
