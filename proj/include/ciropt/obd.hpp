#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ciropt/dataset.hpp"
#include "ciropt/harness.hpp"
#include "ciropt/hpo.hpp"

namespace ciropt {

/// Which columns of an Open Bandit Dataset-style CSV feed the logged dataset.
struct ObdColumnMap {
  std::vector<std::string> numeric{};
  std::vector<std::string> categorical{"user_feature_0", "user_feature_1", "user_feature_2", "user_feature_3"};
  std::string action = "item_id";
  std::string reward = "click";
  std::string propensity = "propensity_score";
  std::string position = "position";  // empty: no position filtering
  long long position_value = 1;
};

/// Parsed rows that survived filtering, before encoding.
struct ObdRawLog {
  std::vector<std::vector<double>> numeric;
  std::vector<std::vector<std::string>> categorical;
  std::vector<std::size_t> actions;
  std::vector<double> rewards;
  std::vector<double> propensities;
  std::size_t rows_read = 0;
  std::size_t rejected = 0;       // non-positive propensity
  std::size_t other_position = 0;  // dropped by the position filter

  std::size_t size() const { return actions.size(); }
  ObdRawLog subset(const std::vector<std::size_t>& rows) const;
};

/// One-hot vocabulary per categorical column in first-appearance order.
struct ObdEncoding {
  std::vector<std::string> numeric;
  std::vector<std::string> categorical;
  std::vector<std::vector<std::string>> categories;

  std::size_t context_dim() const;
  void extend(const ObdRawLog& log);
};

ObdRawLog read_obd_rows(const std::filesystem::path& path, const ObdColumnMap& columns);

/// Unseen categories encode as all-zero blocks.
LoggedDataset encode_obd(const ObdRawLog& log, const ObdEncoding& encoding, std::size_t n_actions);

struct ObdLoadResult {
  LoggedDataset data;
  ObdEncoding encoding;
  ObdRawLog raw;  // rows backing `data`, in the same order
  std::size_t rows_read = 0;
  std::size_t rejected = 0;
  std::size_t other_position = 0;
};

/// Reads, filters and encodes one log. max_rows = 0 keeps every row; otherwise a
/// seeded uniform subsample of max_rows rows in file order.
ObdLoadResult load_obd_csv(const std::filesystem::path& path, const ObdColumnMap& columns, std::size_t max_rows = 0,
                           std::uint64_t seed = 0);

/// Training and test logs with one shared encoding and action count.
std::pair<ObdLoadResult, ObdLoadResult> load_obd_pair(const std::filesystem::path& train,
                                                      const std::filesystem::path& test, const ObdColumnMap& columns,
                                                      std::size_t max_rows = 0, std::uint64_t seed = 0);

/// Writes the mapped columns of a loaded log back out (position fixed to the filter value).
void write_obd_csv(const std::filesystem::path& path, const ObdLoadResult& log, const ObdColumnMap& columns);

struct ObdExperimentConfig {
  std::size_t trials = 30;
  SamplerKind sampler = SamplerKind::Tpe;
  double delta = 0.1;
  double gamma = 0.01;
  double alpha_init = 0.5;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct ObdReportRow {
  Algo algo = Algo::Baseline;
  Surrogate surrogate = Surrogate::Ips;
  double test_value_ips = 0.0;
};

/// Context-free estimate of the logging policy: action frequencies of the log.
PolicyPtr empirical_logging_policy(const LoggedDataset& log);

/// pi_0 over a dataset's contexts: the logged propensity at the logged action,
/// the remaining mass spread over the other actions in proportion to `fallback`.
PolicyTable logging_table(const LoggedDataset& data, const Policy& fallback);

/// Baseline and CIR-HPO with IPS and DR surrogates, tuned on a 50/50 split of
/// `train`, each tuned policy scored by IPS on the uniform-logging `test`.
std::vector<ObdReportRow> obd_experiment(const LoggedDataset& train, const LoggedDataset& test,
                                         const ObdExperimentConfig& config);

void write_obd_report(const std::filesystem::path& path, const std::vector<ObdReportRow>& rows);

extern const std::vector<std::string> kObdReportColumns;

}  // namespace ciropt
