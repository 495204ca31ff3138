#include "ciropt/reward_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>

#include "ciropt/environment.hpp"
#include "ciropt/error.hpp"
#include "ciropt/random.hpp"

namespace ciropt {

std::string_view to_string(ModelFamily family) {
  return family == ModelFamily::LogisticRegression ? "LR" : "RF";
}

void RewardModel::check_context(std::span<const double> context) const {
  if (context.size() != map_.context_dim) throw InvalidInput("RewardModel: context dimension mismatch");
}

double RewardModel::predict(std::span<const double> context, std::size_t action) const {
  check_context(context);
  if (action >= map_.n_actions) throw InvalidInput("RewardModel: action id out of range");
  return predict_unchecked(context, action);
}

void RewardModel::score_actions(std::span<const double> context, std::span<double> out) const {
  check_context(context);
  if (out.size() != map_.n_actions) throw InvalidInput("RewardModel: output size mismatch");
  for (std::size_t a = 0; a < out.size(); ++a) out[a] = predict_unchecked(context, a);
}

// ---------------------------------------------------------------------------
// Logistic regression

LogisticModel::LogisticModel(FeatureMap map, std::vector<double> weights, double intercept)
    : RewardModel(map), weights_(std::move(weights)), intercept_(intercept) {
  if (weights_.size() != map.dim()) throw InvalidInput("LogisticModel: weight vector has the wrong length");
}

double LogisticModel::predict_unchecked(std::span<const double> context, std::size_t action) const {
  const std::size_t dx = context_dim();
  double z = intercept_ + weights_[dx + action];
  for (std::size_t j = 0; j < dx; ++j) z += weights_[j] * context[j];
  return sigmoid(z);
}

void LogisticModel::score_actions(std::span<const double> context, std::span<double> out) const {
  check_context(context);
  if (out.size() != n_actions()) throw InvalidInput("RewardModel: output size mismatch");
  const std::size_t dx = context_dim();
  double shared = intercept_;
  for (std::size_t j = 0; j < dx; ++j) shared += weights_[j] * context[j];
  for (std::size_t a = 0; a < out.size(); ++a) out[a] = sigmoid(shared + weights_[dx + a]);
}

namespace {

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

void check_binary_rewards(const LoggedDataset& data) {
  for (double r : data.rewards())
    if (r != 0.0 && r != 1.0) throw InvalidInput("fit_logistic: rewards must be binary");
}

// Linear scores z_i for all rows.
void compute_scores(const LoggedDataset& data, std::span<const double> w, double b, std::vector<double>& z) {
  const std::size_t dx = data.context_dim();
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto x = data.context(i);
    double s = b + w[dx + data.action(i)];
    for (std::size_t j = 0; j < dx; ++j) s += w[j] * x[j];
    z[i] = s;
  }
}

double mean_log_loss(const LoggedDataset& data, const std::vector<double>& z) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) total += softplus(z[i]) - data.reward(i) * z[i];
  return total / static_cast<double>(data.size());
}

struct Penalty {
  double l1 = 0.0;  // coefficient of |w|_1
  double l2 = 0.0;  // coefficient of |w|^2 / 2

  double value(std::span<const double> w) const {
    double a = 0.0;
    double q = 0.0;
    for (double v : w) {
      a += std::abs(v);
      q += v * v;
    }
    return l1 * a + 0.5 * l2 * q;
  }
};

Penalty make_penalty(const LogisticHyperparams& hp, std::size_t n) {
  const double scale = 1.0 / (hp.C * static_cast<double>(n));
  return {scale * hp.l1_ratio, scale * (1.0 - hp.l1_ratio)};
}

// Largest eigenvalue of X'X/n for the design [phi, 1], by power iteration.
double design_spectral_bound(const LoggedDataset& data) {
  const std::size_t dx = data.context_dim();
  const std::size_t p = dx + data.n_actions() + 1;
  Matrix gram(p, p);
  std::vector<double> row(p);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::fill(row.begin(), row.end(), 0.0);
    auto x = data.context(i);
    std::copy(x.begin(), x.end(), row.begin());
    row[dx + data.action(i)] = 1.0;
    row[p - 1] = 1.0;
    for (std::size_t r = 0; r < p; ++r) {
      if (row[r] == 0.0) continue;
      for (std::size_t c = 0; c < p; ++c) gram(r, c) += row[r] * row[c];
    }
  }
  for (double& v : gram.values()) v /= static_cast<double>(data.size());

  std::vector<double> v(p, 1.0 / std::sqrt(static_cast<double>(p)));
  std::vector<double> next(p);
  double lambda = 0.0;
  for (int it = 0; it < 100; ++it) {
    for (std::size_t r = 0; r < p; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < p; ++c) s += gram(r, c) * v[c];
      next[r] = s;
    }
    double norm = 0.0;
    for (double s : next) norm += s * s;
    norm = std::sqrt(norm);
    if (!(norm > 0.0)) break;
    for (std::size_t r = 0; r < p; ++r) v[r] = next[r] / norm;
    lambda = norm;
  }
  return std::max(lambda, 1e-12);
}

}  // namespace

double logistic_objective(const LoggedDataset& data, const LogisticHyperparams& hp,
                          std::span<const double> weights, double intercept) {
  if (data.empty()) throw InvalidInput("logistic_objective: empty dataset");
  std::vector<double> z(data.size());
  compute_scores(data, weights, intercept, z);
  return mean_log_loss(data, z) + make_penalty(hp, data.size()).value(weights);
}

std::shared_ptr<const LogisticModel> fit_logistic(const LoggedDataset& data, const LogisticHyperparams& hp,
                                                  std::uint64_t /*seed*/, const LogisticSolverOptions& options,
                                                  LogisticFitTrace* trace) {
  if (data.empty()) throw InvalidInput("fit_logistic: empty dataset");
  if (!(hp.C > 0.0)) throw InvalidInput("fit_logistic: C must be positive");
  if (!(hp.l1_ratio >= 0.0 && hp.l1_ratio <= 1.0)) throw InvalidInput("fit_logistic: l1_ratio must lie in [0, 1]");
  check_binary_rewards(data);

  const FeatureMap map{data.context_dim(), data.n_actions()};
  const std::size_t n = data.size();
  const std::size_t dx = map.context_dim;
  const Penalty penalty = make_penalty(hp, n);

  std::vector<double> w(map.dim(), 0.0);
  const double base_rate = std::accumulate(data.rewards().begin(), data.rewards().end(), 0.0) / static_cast<double>(n);
  const double clipped = std::clamp(base_rate, 1e-4, 1.0 - 1e-4);
  double b = std::log(clipped / (1.0 - clipped));

  std::vector<double> z(n);
  compute_scores(data, w, b, z);
  double objective = mean_log_loss(data, z) + penalty.value(w);
  if (trace) {
    trace->objective.assign(1, objective);
    trace->epochs = 0;
    trace->converged = false;
  }

  double lipschitz = 0.25 * design_spectral_bound(data);
  std::vector<double> grad(map.dim());
  std::vector<double> w_new(map.dim());
  std::vector<double> z_new(n);

  for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double resid = sigmoid(z[i]) - data.reward(i);
      auto x = data.context(i);
      for (std::size_t j = 0; j < dx; ++j) grad[j] += resid * x[j];
      grad[dx + data.action(i)] += resid;
      grad_b += resid;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& g : grad) g *= inv_n;
    grad_b *= inv_n;

    // backtracking keeps the objective non-increasing
    double b_new = b;
    double objective_new = objective;
    for (int attempt = 0; attempt < 60; ++attempt) {
      const double step = 1.0 / lipschitz;
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double v = w[j] - step * grad[j];
        const double shrunk = std::copysign(std::max(std::abs(v) - step * penalty.l1, 0.0), v);
        w_new[j] = shrunk / (1.0 + step * penalty.l2);
      }
      b_new = b - step * grad_b;
      compute_scores(data, w_new, b_new, z_new);
      objective_new = mean_log_loss(data, z_new) + penalty.value(w_new);
      if (objective_new <= objective) break;
      lipschitz *= 2.0;
    }
    if (objective_new > objective) break;  // no descent possible at machine precision

    double change = std::abs(b_new - b);
    for (std::size_t j = 0; j < w.size(); ++j) change = std::max(change, std::abs(w_new[j] - w[j]));
    w.swap(w_new);
    z.swap(z_new);
    b = b_new;
    objective = objective_new;
    if (trace) {
      trace->objective.push_back(objective);
      trace->epochs = epoch + 1;
    }
    if (change < options.tolerance) {
      if (trace) trace->converged = true;
      break;
    }
  }
  return std::make_shared<LogisticModel>(map, std::move(w), b);
}

// ---------------------------------------------------------------------------
// Random forest

std::size_t DecisionTree::leaf_index(const FeatureMap& map, std::span<const double> context,
                                     std::size_t action) const {
  std::size_t k = 0;
  while (nodes_[k].feature >= 0) {
    const Node& node = nodes_[k];
    const double v = map.feature(context, action, static_cast<std::size_t>(node.feature));
    k = static_cast<std::size_t>(v <= node.threshold ? node.left : node.right);
  }
  return k;
}

int DecisionTree::depth() const {
  std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
  int deepest = 0;
  while (!stack.empty()) {
    auto [k, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes_[k].feature >= 0) {
      stack.emplace_back(static_cast<std::size_t>(nodes_[k].left), d + 1);
      stack.emplace_back(static_cast<std::size_t>(nodes_[k].right), d + 1);
    }
  }
  return deepest;
}

ForestModel::ForestModel(FeatureMap map, std::vector<DecisionTree> trees)
    : RewardModel(map), trees_(std::move(trees)) {
  if (trees_.empty()) throw InvalidInput("ForestModel: need at least one tree");
}

double ForestModel::predict_unchecked(std::span<const double> context, std::size_t action) const {
  double total = 0.0;
  for (const auto& tree : trees_) total += tree.predict(feature_map(), context, action);
  return total / static_cast<double>(trees_.size());
}

void ForestModel::score_actions(std::span<const double> context, std::span<double> out) const {
  check_context(context);
  if (out.size() != n_actions()) throw InvalidInput("RewardModel: output size mismatch");
  const std::size_t dx = context_dim();
  std::fill(out.begin(), out.end(), 0.0);
  struct Frame {
    int node;
    std::size_t begin;
    std::size_t end;
  };
  std::vector<std::size_t> actions(out.size());
  std::vector<Frame> stack;
  for (const auto& tree : trees_) {
    const auto& nodes = tree.nodes();
    std::iota(actions.begin(), actions.end(), 0);
    stack.clear();
    stack.push_back(Frame{0, 0, actions.size()});
    while (!stack.empty()) {
      const Frame frame = stack.back();
      stack.pop_back();
      const auto& node = nodes[static_cast<std::size_t>(frame.node)];
      if (node.feature < 0) {
        for (std::size_t k = frame.begin; k < frame.end; ++k) out[actions[k]] += node.value;
        continue;
      }
      const auto f = static_cast<std::size_t>(node.feature);
      if (f < dx) {
        stack.push_back({context[f] <= node.threshold ? node.left : node.right, frame.begin, frame.end});
        continue;
      }
      const std::size_t hot = f - dx;
      const auto first = actions.begin() + static_cast<std::ptrdiff_t>(frame.begin);
      const auto last = actions.begin() + static_cast<std::ptrdiff_t>(frame.end);
      const auto mid = std::partition(first, last, [&](std::size_t a) { return (a == hot ? 1.0 : 0.0) <= node.threshold; });
      const auto split = static_cast<std::size_t>(mid - actions.begin());
      if (split > frame.begin) stack.push_back({node.left, frame.begin, split});
      if (split < frame.end) stack.push_back({node.right, split, frame.end});
    }
  }
  const double n_trees = static_cast<double>(trees_.size());
  for (double& v : out) v /= n_trees;
}

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // count-weighted Gini of the children
};

// Count-weighted Gini, n * 2p(1-p).
double weighted_gini(double positives, double count) {
  if (count <= 0.0) return 0.0;
  const double p = positives / count;
  return 2.0 * count * p * (1.0 - p);
}

// Grows one tree over a row subset. Each feature keeps the node's rows sorted by
// that feature in a shared buffer; a split stably partitions every feature's
// segment, so no node re-sorts.
class TreeGrower {
 public:
  TreeGrower(const Matrix& features, const std::vector<double>& labels, int max_depth, int min_samples_split)
      : features_(features), labels_(labels), max_depth_(max_depth), min_samples_split_(min_samples_split) {}

  std::vector<DecisionTree::Node> grow(const std::vector<std::size_t>& rows) {
    const std::size_t m = rows.size();
    const std::size_t n_features = features_.cols();
    rows_ = rows;
    sorted_.assign(n_features * m, 0);
    keyed_.resize(m);
    for (std::size_t f = 0; f < n_features; ++f) {
      for (std::uint32_t k = 0; k < m; ++k) keyed_[k] = {value(k, f), k};
      std::sort(keyed_.begin(), keyed_.end());
      auto* seg = sorted_.data() + f * m;
      for (std::size_t k = 0; k < m; ++k) seg[k] = keyed_[k].second;
    }
    goes_left_.assign(m, 0);
    scratch_.resize(m);

    nodes_.clear();
    nodes_.push_back({});
    struct Pending {
      std::size_t node;
      std::size_t begin;
      std::size_t end;
      int depth;
    };
    std::vector<Pending> stack{{0, 0, m, 0}};
    while (!stack.empty()) {
      const Pending item = stack.back();
      stack.pop_back();
      const std::size_t count_n = item.end - item.begin;
      double positives = 0.0;
      for (std::size_t k = item.begin; k < item.end; ++k) positives += label(sorted_[k]);
      const double count = static_cast<double>(count_n);
      nodes_[item.node].value = positives / count;
      nodes_[item.node].count = count_n;

      const bool pure = positives == 0.0 || positives == count;
      if (pure || item.depth >= max_depth_ || static_cast<int>(count_n) < min_samples_split_) continue;

      const SplitChoice split = best_split(item.begin, item.end, positives, weighted_gini(positives, count));
      if (split.feature < 0) continue;

      const auto f_split = static_cast<std::size_t>(split.feature);
      std::size_t n_left = 0;
      for (std::size_t k = item.begin; k < item.end; ++k) {
        const std::uint32_t r = sorted_[k];
        goes_left_[r] = value(r, f_split) <= split.threshold;
        n_left += goes_left_[r];
      }
      for (std::size_t f = 0; f < n_features; ++f) partition(f * m + item.begin, f * m + item.end);

      const auto left_id = nodes_.size();
      nodes_.push_back({});
      const auto right_id = nodes_.size();
      nodes_.push_back({});
      auto& node = nodes_[item.node];
      node.feature = split.feature;
      node.threshold = split.threshold;
      node.left = static_cast<int>(left_id);
      node.right = static_cast<int>(right_id);
      stack.push_back({right_id, item.begin + n_left, item.end, item.depth + 1});
      stack.push_back({left_id, item.begin, item.begin + n_left, item.depth + 1});
    }
    return std::move(nodes_);
  }

 private:
  double value(std::uint32_t local, std::size_t f) const { return features_(rows_[local], f); }
  double label(std::uint32_t local) const { return labels_[rows_[local]]; }

  void partition(std::size_t begin, std::size_t end) {
    std::size_t left = begin;
    std::size_t right = 0;
    for (std::size_t k = begin; k < end; ++k) {
      const std::uint32_t r = sorted_[k];
      if (goes_left_[r])
        sorted_[left++] = r;
      else
        scratch_[right++] = r;
    }
    std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(right), sorted_.begin() + static_cast<std::ptrdiff_t>(left));
  }

  SplitChoice best_split(std::size_t begin, std::size_t end, double total_pos, double parent_impurity) const {
    SplitChoice best;
    best.impurity = parent_impurity - 1e-12;
    const std::size_t m = rows_.size();
    const double total = static_cast<double>(end - begin);
    for (std::size_t f = 0; f < features_.cols(); ++f) {
      const std::uint32_t* seg = sorted_.data() + f * m;
      if (value(seg[begin], f) == value(seg[end - 1], f)) continue;
      double left_pos = 0.0;
      for (std::size_t k = begin; k + 1 < end; ++k) {
        left_pos += label(seg[k]);
        const double here = value(seg[k], f);
        const double next = value(seg[k + 1], f);
        if (here == next) continue;
        const double left_n = static_cast<double>(k + 1 - begin);
        const double impurity =
            weighted_gini(left_pos, left_n) + weighted_gini(total_pos - left_pos, total - left_n);
        if (impurity < best.impurity) {
          best.impurity = impurity;
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (here + next);
        }
      }
    }
    return best;
  }

  const Matrix& features_;
  const std::vector<double>& labels_;
  int max_depth_;
  int min_samples_split_;
  std::vector<std::size_t> rows_;
  std::vector<std::uint32_t> sorted_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> scratch_;
  std::vector<std::pair<double, std::uint32_t>> keyed_;
  std::vector<DecisionTree::Node> nodes_;
};

}  // namespace

std::shared_ptr<const ForestModel> fit_forest(const LoggedDataset& data, const ForestHyperparams& hp,
                                              std::uint64_t seed) {
  if (data.empty()) throw InvalidInput("fit_forest: empty dataset");
  if (hp.n_trees < 1) throw InvalidInput("fit_forest: need at least one tree");
  if (hp.max_depth < 1) throw InvalidInput("fit_forest: max_depth must be at least 1");
  if (!(hp.max_samples > 0.0 && hp.max_samples <= 1.0)) throw InvalidInput("fit_forest: max_samples must lie in (0, 1]");

  const FeatureMap map{data.context_dim(), data.n_actions()};
  const std::size_t n = data.size();
  Matrix features(n, map.dim());
  for (std::size_t i = 0; i < n; ++i) {
    auto x = data.context(i);
    auto row = features.row(i);
    for (std::size_t f = 0; f < map.dim(); ++f) row[f] = map.feature(x, data.action(i), f);
  }
  const std::vector<double>& labels = data.rewards();
  const auto subsample =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(hp.max_samples * static_cast<double>(n) - 1e-9)));

  TreeGrower grower(features, labels, hp.max_depth, hp.min_samples_split);
  std::vector<DecisionTree> trees;
  trees.reserve(static_cast<std::size_t>(hp.n_trees));
  std::vector<std::size_t> order(n);
  for (int t = 0; t < hp.n_trees; ++t) {
    Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::iota(order.begin(), order.end(), 0);
    // partial Fisher-Yates: the first `subsample` entries are a uniform draw without replacement
    for (std::size_t k = 0; k < subsample; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, n - 1);
      std::swap(order[k], order[pick(rng)]);
    }
    std::vector<std::size_t> rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(subsample, 1)));
    auto nodes = grower.grow(rows);
    trees.emplace_back(std::move(nodes), std::move(rows));
  }
  return std::make_shared<ForestModel>(map, std::move(trees));
}

}  // namespace ciropt
