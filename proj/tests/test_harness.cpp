#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ciropt/csv.hpp"
#include "ciropt/error.hpp"
#include "ciropt/harness.hpp"
#include "temp_dir.hpp"

using namespace ciropt;

namespace {

ExperimentConfig smoke_config(const std::filesystem::path& out) {
  ExperimentConfig c;
  c.beta0 = {0.0, 20.0};
  c.algos = {Algo::Baseline, Algo::Cir};
  c.trials = 12;
  c.seeds = 2;
  c.n_train = 200;
  c.n_val = 200;
  c.n_test = 2000;
  c.out = out;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("names parse back") {
  for (Algo a : {Algo::Baseline, Algo::Cir, Algo::CirNoCso, Algo::CirNoAir}) CHECK(parse_algo(to_string(a)) == a);
  CHECK(parse_sampler("tpe") == SamplerKind::Tpe);
  CHECK(parse_sampler("random") == SamplerKind::Random);
  CHECK(parse_surrogate("dr") == Surrogate::Dr);
  CHECK_THROWS_AS(parse_algo("cir_no_air"), InvalidInput);
  CHECK_THROWS_AS(parse_sampler("grid"), InvalidInput);
  CHECK_THROWS_AS(parse_surrogate("snips"), InvalidInput);
}

TEST_CASE("config preconditions") {
  ExperimentConfig c;
  CHECK_NOTHROW(validate_config(c));
  auto rejects = [](auto mutate) {
    ExperimentConfig bad;
    mutate(bad);
    CHECK_THROWS_AS(validate_config(bad), InvalidInput);
  };
  rejects([](ExperimentConfig& x) { x.trials = 0; });
  rejects([](ExperimentConfig& x) { x.n_train = 1; });
  rejects([](ExperimentConfig& x) { x.n_val = 1; });
  rejects([](ExperimentConfig& x) { x.seeds = 0; });
  rejects([](ExperimentConfig& x) { x.delta = 0.0; });
  rejects([](ExperimentConfig& x) { x.delta = 0.6; });
  rejects([](ExperimentConfig& x) { x.gamma = 0.0; });
  rejects([](ExperimentConfig& x) { x.alpha_init = 1.5; });
  rejects([](ExperimentConfig& x) { x.beta0.clear(); });
  rejects([](ExperimentConfig& x) { x.algos.clear(); });
  rejects([](ExperimentConfig& x) { x.workers = 0; });
  rejects([](ExperimentConfig& x) { x.n_grid = {400, 1}; });
  ExperimentConfig edge;
  edge.delta = 0.5;
  CHECK_NOTHROW(validate_config(edge));
}

TEST_CASE("seed topology") {
  const RunSeeds a = run_seeds(7, 5, false);
  const RunSeeds b = run_seeds(8, 5, false);
  CHECK(a.environment != b.environment);
  CHECK(a.train != b.train);
  CHECK(a.val != b.val);
  CHECK(a.hpo != b.hpo);
  CHECK(a.train != a.val);
  const RunSeeds fa = run_seeds(7, 5, true);
  const RunSeeds fb = run_seeds(8, 5, true);
  CHECK(fa.environment == fb.environment);
  CHECK(fa.truth == fb.truth);
  CHECK(fa.train != fb.train);
  CHECK(fa.hpo == a.hpo);
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  std::vector<int> hits(50, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 6) throw InvalidInput("boom");
                               }),
                  InvalidInput);
}

TEST_CASE("mean_ci uses 1.96 standard errors") {
  const MeanCi m = mean_ci({1.0, 2.0, 3.0, 4.0});
  CHECK(m.mean == doctest::Approx(2.5));
  CHECK(m.half_width == doctest::Approx(1.96 * std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(std::isnan(mean_ci({1.0}).half_width));
}

TEST_CASE("smoke run writes schema-valid CSVs") {
  TempDir dir("harness");
  const ExperimentConfig c = smoke_config(dir.path());
  const HpoExperiment r = run_hpo_experiment(c);

  const CsvTable trials = read_csv(dir.path() / "trials.csv");
  require_header(trials, kTrialsColumns, "trials.csv");
  const CsvTable summary = read_csv(dir.path() / "summary.csv");
  require_header(summary, kSummaryColumns, "summary.csv");
  const CsvTable regret = read_csv(dir.path() / "regret.csv");
  require_header(regret, kRegretColumns, "regret.csv");

  // T x seeds rows per (algo, beta0) cell.
  std::map<std::pair<std::string, std::string>, std::size_t> per_cell;
  for (const auto& row : trials.rows) per_cell[{row[trials.column("algo")], row[trials.column("beta0")]}] += 1;
  CHECK(per_cell.size() == 4);
  for (const auto& [cell, count] : per_cell) CHECK(count == c.trials * c.seeds);
  CHECK(summary.rows.size() == 4 * c.trials);
  CHECK(regret.rows.size() == 4 * c.seeds);

  // Exactly one hyperparameter block is populated per row.
  for (const auto& row : trials.rows) {
    const bool lr = row[trials.column("model_family")] == to_string(ModelFamily::LogisticRegression);
    CHECK(row[trials.column("C")].empty() == !lr);
    CHECK(row[trials.column("l1_ratio")].empty() == !lr);
    CHECK(row[trials.column("max_depth")].empty() == lr);
    CHECK(row[trials.column("min_samples_split")].empty() == lr);
    CHECK(row[trials.column("max_samples")].empty() == lr);
    const double tau = parse_double(row[trials.column("tau")], "tau");
    const double v_ips = parse_double(row[trials.column("v_ips_val")], "v_ips_val");
    const double v_true = parse_double(row[trials.column("v_true")], "v_true");
    CHECK(tau == doctest::Approx(v_ips - v_true).epsilon(1e-7));
  }
  for (const auto& row : regret.rows) CHECK(std::abs(parse_double(row[regret.column("residual")], "r")) < 1e-10);
  CHECK(r.runs.size() == 4 * c.seeds);
}

TEST_CASE("normalised curves follow the incumbent") {
  TempDir dir("curves");
  ExperimentConfig c = smoke_config(dir.path());
  const HpoExperiment r = execute_hpo_experiment(c);
  for (const RunOutcome& run : r.runs) {
    REQUIRE(run.norm_gen.size() == c.trials);
    bool at_logging = true;
    double gen = 1.0;
    double val = run.v_hat_pi0 / run.v_pi0;
    for (std::size_t t = 0; t < run.trials.size(); ++t) {
      const TrialRecord& rec = run.trials[t];
      if (rec.incumbent) {
        at_logging = false;
        gen = *rec.v_true / run.v_pi0;
        val = rec.v_ips_val / run.v_pi0;
      }
      if (at_logging) {
        CHECK(run.norm_gen[t] == 1.0);
      }
      CHECK(run.norm_gen[t] == gen);
      CHECK(run.norm_val[t] == val);
    }
    CHECK(run.keeps_logging_policy == at_logging);
    if (run.algo != Algo::Baseline) CHECK_FALSE(run.keeps_logging_policy);
    CHECK(std::abs(run.regret.residual) < 1e-10);
    CHECK(run.regret.chosen <= run.trials.size());
  }

  // Summary rows are per-trial means across the cell's seeds.
  for (const SummaryRow& s : r.summary) {
    double sum = 0.0;
    std::size_t k = 0;
    for (const RunOutcome& run : r.runs) {
      if (run.algo == s.algo && run.beta0 == s.beta0) {
        sum += run.norm_gen[s.trial - 1];
        ++k;
      }
    }
    CHECK(k == c.seeds);
    CHECK(s.mean_norm_gen == doctest::Approx(sum / static_cast<double>(k)));
  }
}

TEST_CASE("algorithms share environment and data within a seed") {
  ExperimentConfig c = smoke_config("unused");
  const RunOutcome base = run_single_hpo(c, Algo::Baseline, 3.0, 4);
  const RunOutcome cir = run_single_hpo(c, Algo::CirNoAir, 3.0, 4);
  CHECK(base.v_pi0 == cir.v_pi0);
  CHECK(base.v_hat_pi0 == cir.v_hat_pi0);
  // Without AIR the first trial sees the same sampler draw.
  CHECK(base.trials.front().theta == cir.trials.front().theta);
  CHECK(base.trials.front().v_ips_val == cir.trials.front().v_ips_val);
}

TEST_CASE("fixed environment shares V(pi_0) across seeds") {
  ExperimentConfig c = smoke_config("unused");
  c.trials = 1;
  const RunOutcome a = run_single_hpo(c, Algo::Baseline, 3.0, 0);
  const RunOutcome b = run_single_hpo(c, Algo::Baseline, 3.0, 1);
  CHECK(a.v_pi0 != b.v_pi0);
  c.fix_env = true;
  const RunOutcome fa = run_single_hpo(c, Algo::Baseline, 3.0, 0);
  const RunOutcome fb = run_single_hpo(c, Algo::Baseline, 3.0, 1);
  CHECK(fa.v_pi0 == fb.v_pi0);
  CHECK(fa.v_hat_pi0 != fb.v_hat_pi0);
}

TEST_CASE("outputs are byte-identical across reruns and worker counts") {
  TempDir one("det1");
  TempDir two("det2");
  ExperimentConfig c = smoke_config(one.path());
  c.trials = 6;
  run_hpo_experiment(c);
  c.out = two.path();
  c.workers = 3;
  run_hpo_experiment(c);
  for (const char* name : {"trials.csv", "summary.csv", "regret.csv"}) {
    CHECK(slurp(one.path() / name) == slurp(two.path() / name));
  }
}

TEST_CASE("bounds study rows and orderings") {
  TempDir dir("bounds");
  ExperimentConfig c;
  c.beta0 = {3.0, 20.0};
  c.n_grid = {200, 400};
  c.reps = 5;
  c.delta = 0.05;
  c.n_train = 300;
  c.n_test = 5000;
  c.out = dir.path();
  c.workers = 2;
  const auto rows = run_bounds_study(c);
  CHECK(rows.size() == 2 * 2 * 5 * 3);
  const CsvTable t = read_csv(dir.path() / "bounds.csv");
  require_header(t, kBoundsColumns, "bounds.csv");
  CHECK(t.rows.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); i += 3) {
    REQUIRE(rows[i].method == BoundMethod::TTest);
    REQUIRE(rows[i + 1].method == BoundMethod::Hoeffding);
    REQUIRE(rows[i + 2].method == BoundMethod::Bernstein);
    // One replication's terms feed all three bounds.
    CHECK(rows[i].estimate == rows[i + 1].estimate);
    CHECK(rows[i].estimate == rows[i + 2].estimate);
    for (std::size_t m = 0; m < 3; ++m) {
      CHECK(rows[i + m].lower_bound <= rows[i + m].estimate);
      CHECK(rows[i + m].violated == (rows[i + m].lower_bound > rows[i + m].v_true));
    }
  }
}

TEST_CASE("optimality table is monotone in beta0") {
  ExperimentConfig c;
  c.beta0 = {-3.0, 0.0, 3.0, 10.0, 20.0};
  c.env_seeds = 4;
  c.n_test = 5000;
  const auto rows = execute_optimality_table(c);
  REQUIRE(rows.size() == 5);
  for (std::size_t b = 1; b < rows.size(); ++b) {
    CHECK(rows[b].mean_v_pi0 > rows[b - 1].mean_v_pi0);
    CHECK(rows[b].mean_ratio > rows[b - 1].mean_ratio);
  }
  for (const auto& r : rows) {
    CHECK(r.mean_ratio > 0.0);
    CHECK(r.mean_ratio <= 1.0);
  }
}

TEST_CASE("proposition checks on a small grid") {
  TempDir dir("props");
  ExperimentConfig c;
  c.beta0 = {3.0};
  c.grid_size = 6;
  c.seeds = 8;
  c.reps = 12;
  c.n_train = 300;
  c.n_val = 300;
  c.n_test = 5000;
  c.delta = 0.05;
  c.out = dir.path();
  const PropChecks p = run_prop_checks(c);
  CHECK(p.rows.size() == 12);
  CHECK(p.summary.max_residual < 1e-10);
  CHECK(p.summary.sandwich_reps == 8);
  CHECK(p.summary.coverage_reps == 12);
  CHECK(p.summary.lower_holds);
  for (const PropRow& row : p.rows) {
    CHECK(row.v_true_selected <= row.v_true_best);
    CHECK(row.bound == doctest::Approx(optimism_bound(6, 300, 0.05)));
  }
  require_header(read_csv(dir.path() / "props.csv"), kPropsColumns, "props.csv");
  const CsvTable s = read_csv(dir.path() / "props_summary.csv");
  require_header(s, kPropsSummaryColumns, "props_summary.csv");
  CHECK(s.rows.size() == 4);
}
