#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "ciropt/dataset.hpp"
#include "ciropt/policy.hpp"
#include "ciropt/sampler.hpp"
#include "ciropt/search_space.hpp"

namespace ciropt {

enum class Surrogate { Ips, Dr };

std::string_view to_string(Surrogate surrogate);

/// Inputs shared by both procedures. `logging_on_val` is pi_0 tabulated over
/// val's contexts; `logging` is the callable pi_0 used when mixing outside D_val.
struct HpoProblem {
  const LoggedDataset& train;
  const LoggedDataset& val;
  PolicyPtr logging;
  PolicyTable logging_on_val;
};

/// Exact value of a policy. Only the ledger sees its output.
using ValueOracle = std::function<double(const Policy&)>;

struct HpoOptions {
  std::size_t trials = 100;
  Surrogate surrogate = Surrogate::Ips;
  std::uint64_t seed = 0;
  ValueOracle oracle;  // optional
};

enum class IncumbentRule { StrictlyGreater, GreaterOrEqual };

struct CirOptions {
  double delta = 0.1;
  double gamma = 0.01;
  double alpha_init = 0.5;
  bool enable_cso = true;
  bool enable_air = true;
  IncumbentRule rule = IncumbentRule::GreaterOrEqual;
  // When false the first scored trial always becomes the incumbent.
  bool start_from_logging = false;
};

struct TrialRecord {
  std::size_t t = 0;  // 1-based
  HyperparamPoint theta;
  double objective = 0.0;
  double v_ips_val = 0.0;
  double v_lower_val = 0.0;
  double alpha_t = 0.0;
  int s_t = 0;
  std::optional<double> v_true;
  bool incumbent = false;

  Observation observation() const { return {theta, objective}; }
};

/// Values of the logging policy, the incumbent before the first trial unless CIR-HPO starts empty.
struct LoggingRecord {
  double objective = 0.0;
  double v_ips_val = 0.0;
  std::optional<double> v_true;
};

struct HpoResult {
  std::optional<HyperparamPoint> best_theta;  // nullopt: keep the logging policy
  std::optional<std::size_t> best_trial;      // index into trials
  double best_alpha = 0.0;
  PolicyPtr best_policy;
  LoggingRecord logging;
  std::vector<TrialRecord> trials;

  bool keeps_logging_policy() const { return !best_theta.has_value(); }
};

/// Running state of adaptive imitation regularisation.
class AirState {
 public:
  AirState(double alpha_init, double gamma, double delta, std::size_t budget);

  void add(int score);
  std::size_t count() const { return count_; }
  int score_sum() const { return sum_; }
  double alpha_init() const { return alpha_init_; }
  double gamma() const { return gamma_; }
  double delta() const { return delta_; }
  std::size_t budget() const { return budget_; }

 private:
  double alpha_init_;
  double gamma_;
  double delta_;
  std::size_t budget_;
  std::size_t count_ = 0;
  int sum_ = 0;
};

/// alpha_init + (1 - alpha_init) (t/T)^gamma (sum s)/t, clipped to [0, 1].
double air_alpha(const AirState& state, std::size_t t);

/// +1 / -1 when the paired t test at level delta (two-sided) finds pi_0 better / worse
/// than the candidate on D_val, 0 otherwise.
int air_score(const PolicyTable& pi_0, const PolicyTable& candidate, const LoggedDataset& val, double delta);
int air_score(const Policy& pi_0, const Policy& candidate, const LoggedDataset& val, double delta);

HpoResult baseline_hpo(const Sampler& sampler, const HpoProblem& problem, const HpoOptions& options);

HpoResult cir_hpo(const Sampler& sampler, const HpoProblem& problem, const HpoOptions& options,
                  const CirOptions& cir = {});

}  // namespace ciropt
