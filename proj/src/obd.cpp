#include "ciropt/obd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ciropt/csv.hpp"
#include "ciropt/error.hpp"
#include "ciropt/estimators.hpp"
#include "ciropt/random.hpp"
#include "ciropt/sampler.hpp"

namespace ciropt {

namespace {

constexpr std::uint64_t kSubsampleStream = 21;
constexpr std::uint64_t kSplitStream = 22;
constexpr std::uint64_t kObdHpoStream = 23;

std::vector<std::size_t> subsample_rows(std::size_t n, std::size_t max_rows, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (max_rows == 0 || max_rows >= n) return idx;
  Rng rng = make_rng(derive_seed(seed, kSubsampleStream));
  for (std::size_t i = 0; i < max_rows; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(max_rows);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::size_t max_action(const ObdRawLog& log) { return *std::max_element(log.actions.begin(), log.actions.end()); }

ObdLoadResult finish(ObdRawLog raw, ObdEncoding encoding, std::size_t n_actions) {
  ObdLoadResult out;
  out.rows_read = raw.rows_read;
  out.rejected = raw.rejected;
  out.other_position = raw.other_position;
  out.data = encode_obd(raw, encoding, n_actions);
  out.encoding = std::move(encoding);
  out.raw = std::move(raw);
  return out;
}

ObdRawLog read_subsampled(const std::filesystem::path& path, const ObdColumnMap& columns, std::size_t max_rows,
                          std::uint64_t seed) {
  ObdRawLog raw = read_obd_rows(path, columns);
  if (raw.size() == 0) throw InvalidInput(path.string() + ": no usable rows");
  if (max_rows != 0 && max_rows < raw.size()) raw = raw.subset(subsample_rows(raw.size(), max_rows, seed));
  return raw;
}

}  // namespace

ObdRawLog ObdRawLog::subset(const std::vector<std::size_t>& rows) const {
  ObdRawLog out;
  out.rows_read = rows_read;
  out.rejected = rejected;
  out.other_position = other_position;
  for (std::size_t r : rows) {
    out.numeric.push_back(numeric[r]);
    out.categorical.push_back(categorical[r]);
    out.actions.push_back(actions[r]);
    out.rewards.push_back(rewards[r]);
    out.propensities.push_back(propensities[r]);
  }
  return out;
}

std::size_t ObdEncoding::context_dim() const {
  std::size_t d = numeric.size();
  for (const auto& c : categories) d += c.size();
  return d;
}

void ObdEncoding::extend(const ObdRawLog& log) {
  categories.resize(categorical.size());
  for (const auto& row : log.categorical) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      auto& seen = categories[j];
      if (std::find(seen.begin(), seen.end(), row[j]) == seen.end()) seen.push_back(row[j]);
    }
  }
}

ObdRawLog read_obd_rows(const std::filesystem::path& path, const ObdColumnMap& columns) {
  const CsvTable table = read_csv(path);
  auto column = [&](const std::string& name) {
    const auto c = table.find_column(name);
    if (!c) throw SchemaError(path.string() + ": missing column '" + name + "'");
    return *c;
  };
  std::vector<std::size_t> numeric;
  for (const auto& name : columns.numeric) numeric.push_back(column(name));
  std::vector<std::size_t> categorical;
  for (const auto& name : columns.categorical) categorical.push_back(column(name));
  const std::size_t action = column(columns.action);
  const std::size_t reward = column(columns.reward);
  const std::size_t propensity = column(columns.propensity);
  const std::optional<std::size_t> position =
      columns.position.empty() ? std::nullopt : std::optional<std::size_t>(column(columns.position));

  ObdRawLog log;
  log.rows_read = table.rows.size();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string where = path.string() + " row " + std::to_string(r + 1);
    if (position && parse_integer(row[*position], where) != columns.position_value) {
      ++log.other_position;
      continue;
    }
    const double p = parse_double(row[propensity], where);
    if (!(p > 0.0)) {
      ++log.rejected;
      continue;
    }
    if (p > 1.0) throw SchemaError(where + ": propensity above 1");
    const double click = parse_double(row[reward], where);
    if (click != 0.0 && click != 1.0) throw SchemaError(where + ": reward is not binary");
    const long long a = parse_integer(row[action], where);
    if (a < 0) throw SchemaError(where + ": negative action id");

    std::vector<double> nums;
    for (std::size_t c : numeric) nums.push_back(parse_double(row[c], where));
    std::vector<std::string> cats;
    for (std::size_t c : categorical) cats.push_back(row[c]);
    log.numeric.push_back(std::move(nums));
    log.categorical.push_back(std::move(cats));
    log.actions.push_back(static_cast<std::size_t>(a));
    log.rewards.push_back(click);
    log.propensities.push_back(p);
  }
  return log;
}

LoggedDataset encode_obd(const ObdRawLog& log, const ObdEncoding& encoding, std::size_t n_actions) {
  if (log.size() == 0) throw InvalidInput("no usable rows");
  Matrix contexts(log.size(), encoding.context_dim());
  for (std::size_t i = 0; i < log.size(); ++i) {
    std::size_t col = 0;
    for (double v : log.numeric[i]) contexts(i, col++) = v;
    for (std::size_t j = 0; j < encoding.categories.size(); ++j) {
      const auto& vocab = encoding.categories[j];
      const auto it = std::find(vocab.begin(), vocab.end(), log.categorical[i][j]);
      if (it != vocab.end()) contexts(i, col + static_cast<std::size_t>(it - vocab.begin())) = 1.0;
      col += vocab.size();
    }
  }
  return LoggedDataset(std::move(contexts), log.actions, log.rewards, log.propensities, n_actions, 1.0);
}

ObdLoadResult load_obd_csv(const std::filesystem::path& path, const ObdColumnMap& columns, std::size_t max_rows,
                           std::uint64_t seed) {
  ObdRawLog raw = read_subsampled(path, columns, max_rows, seed);
  ObdEncoding encoding{columns.numeric, columns.categorical, {}};
  encoding.extend(raw);
  const std::size_t n_actions = max_action(raw) + 1;
  return finish(std::move(raw), std::move(encoding), n_actions);
}

std::pair<ObdLoadResult, ObdLoadResult> load_obd_pair(const std::filesystem::path& train,
                                                      const std::filesystem::path& test, const ObdColumnMap& columns,
                                                      std::size_t max_rows, std::uint64_t seed) {
  ObdRawLog train_raw = read_subsampled(train, columns, max_rows, seed);
  ObdRawLog test_raw = read_subsampled(test, columns, max_rows, derive_seed(seed, 1));
  ObdEncoding encoding{columns.numeric, columns.categorical, {}};
  encoding.extend(train_raw);
  encoding.extend(test_raw);
  const std::size_t n_actions = std::max(max_action(train_raw), max_action(test_raw)) + 1;
  return {finish(std::move(train_raw), encoding, n_actions), finish(std::move(test_raw), encoding, n_actions)};
}

void write_obd_csv(const std::filesystem::path& path, const ObdLoadResult& log, const ObdColumnMap& columns) {
  std::vector<std::string> header = columns.numeric;
  header.insert(header.end(), columns.categorical.begin(), columns.categorical.end());
  header.insert(header.end(), {columns.action, columns.reward, columns.propensity});
  if (!columns.position.empty()) header.push_back(columns.position);
  CsvWriter out(path, header);
  const ObdRawLog& raw = log.raw;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::vector<std::string> row;
    for (double v : raw.numeric[i]) row.push_back(format_double(v));
    row.insert(row.end(), raw.categorical[i].begin(), raw.categorical[i].end());
    row.push_back(std::to_string(raw.actions[i]));
    row.push_back(format_double(raw.rewards[i]));
    row.push_back(format_double(raw.propensities[i]));
    if (!columns.position.empty()) row.push_back(std::to_string(columns.position_value));
    out.write_row(row);
  }
}

PolicyPtr empirical_logging_policy(const LoggedDataset& log) {
  std::vector<double> counts(log.n_actions(), 0.0);
  for (std::size_t a : log.actions()) counts[a] += 1.0;
  return tabular_policy(std::move(counts));
}

PolicyTable logging_table(const LoggedDataset& data, const Policy& fallback) {
  const std::size_t k = data.n_actions();
  Matrix probs(data.size(), k);
  std::vector<double> base(k);
  for (std::size_t i = 0; i < data.size(); ++i) {
    fallback.action_probs(data.context(i), base);
    const std::size_t logged = data.action(i);
    const double p = data.propensity(i);
    double others = 0.0;
    for (std::size_t a = 0; a < k; ++a) others += a == logged ? 0.0 : base[a];
    for (std::size_t a = 0; a < k; ++a) {
      if (a == logged) {
        probs(i, a) = p;
      } else {
        probs(i, a) = (1.0 - p) * (others > 0.0 ? base[a] / others : 1.0 / static_cast<double>(k - 1));
      }
    }
  }
  return PolicyTable(std::move(probs));
}

std::vector<ObdReportRow> obd_experiment(const LoggedDataset& train, const LoggedDataset& test,
                                         const ObdExperimentConfig& config) {
  if (train.n_actions() != test.n_actions() || train.context_dim() != test.context_dim())
    throw InvalidInput("training and test logs use different encodings");
  if (train.size() < 4) throw InvalidInput("need at least 4 training rows for the train/validation split");
  if (test.empty()) throw InvalidInput("empty test log");
  const double p0 = test.propensity(0);
  for (double p : test.propensities()) {
    if (std::abs(p - p0) > 1e-12 * p0) throw InvalidInput("test log propensities are not uniform");
  }
  if (config.trials < 1) throw InvalidInput("trials must be >= 1");
  if (!(config.delta > 0.0 && config.delta <= 0.5)) throw InvalidInput("delta must lie in (0, 0.5]");

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng = make_rng(derive_seed(config.seed, kSplitStream));
  std::shuffle(order.begin(), order.end(), split_rng);
  const std::size_t half = train.size() / 2;
  std::vector<std::size_t> tr_rows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
  std::vector<std::size_t> val_rows(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
  std::sort(tr_rows.begin(), tr_rows.end());
  std::sort(val_rows.begin(), val_rows.end());
  const LoggedDataset tr = train.subset(tr_rows);
  const LoggedDataset val = train.subset(val_rows);

  const PolicyPtr logging = empirical_logging_policy(train);
  const HpoProblem problem{tr, val, logging, logging_table(val, *logging)};

  const std::vector<std::pair<Algo, Surrogate>> cells{
      {Algo::Baseline, Surrogate::Ips}, {Algo::Baseline, Surrogate::Dr}, {Algo::Cir, Surrogate::Ips}, {Algo::Cir, Surrogate::Dr}};
  std::vector<ObdReportRow> rows(cells.size());
  parallel_for(cells.size(), config.workers, [&](std::size_t c) {
    const auto [algo, surrogate] = cells[c];
    HpoOptions options;
    options.trials = config.trials;
    options.surrogate = surrogate;
    options.seed = derive_seed(config.seed, kObdHpoStream);
    std::unique_ptr<Sampler> sampler;
    if (config.sampler == SamplerKind::Random) {
      sampler = std::make_unique<RandomSampler>();
    } else {
      sampler = std::make_unique<TpeSampler>();
    }
    HpoResult result;
    if (algo == Algo::Baseline) {
      result = baseline_hpo(*sampler, problem, options);
    } else {
      CirOptions cir;
      cir.delta = config.delta;
      cir.gamma = config.gamma;
      cir.alpha_init = config.alpha_init;
      result = cir_hpo(*sampler, problem, options, cir);
    }
    rows[c] = {algo, surrogate, ips(*result.best_policy, test).mean};
  });
  return rows;
}

const std::vector<std::string> kObdReportColumns{"algo", "surrogate", "test_value_ips"};

void write_obd_report(const std::filesystem::path& path, const std::vector<ObdReportRow>& rows) {
  CsvWriter out(path, kObdReportColumns);
  for (const auto& r : rows) {
    out.write_row({std::string(to_string(r.algo)), std::string(to_string(r.surrogate)), format_double(r.test_value_ips)});
  }
}

}  // namespace ciropt
