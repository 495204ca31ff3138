// Prints one PASS/FAIL line per acceptance criterion and copies the lines to
// acceptance_report.txt in the working directory. Exits 0 once every requested
// criterion has been evaluated; the verdicts are in the output.
//
//   acceptance [criterion ...] [--workers N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <thread>
#include <vector>

#include "ciropt/cli.hpp"
#include "ciropt/environment.hpp"
#include "ciropt/estimators.hpp"
#include "ciropt/harness.hpp"
#include "ciropt/random.hpp"
#include "../temp_dir.hpp"

using namespace ciropt;

namespace {

std::size_t g_workers = 1;

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* pattern, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* pattern, ...) {
  char buf[1024];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double std_error(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// Linear interpolation between order statistics.
double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// ---------------------------------------------------------------- HPO runs

struct CellKey {
  Algo algo;
  SamplerKind sampler;
  double beta0;
  bool operator<(const CellKey& o) const {
    return std::tie(algo, sampler, beta0) < std::tie(o.algo, o.sampler, o.beta0);
  }
};

constexpr std::size_t kHpoSeeds = 10;
constexpr std::size_t kHpoTrials = 300;

ExperimentConfig hpo_config(SamplerKind sampler) {
  ExperimentConfig c;
  c.sampler = sampler;
  c.estimator = Surrogate::Ips;
  c.trials = kHpoTrials;
  c.seeds = kHpoSeeds;
  c.n_train = 1000;
  c.n_val = 1000;
  c.n_test = 10000;
  c.delta = 0.1;
  c.gamma = 0.01;
  c.alpha_init = 0.5;
  c.workers = g_workers;
  return c;
}

class HpoRuns {
 public:
  const std::vector<RunOutcome>& cell(Algo algo, SamplerKind sampler, double beta0) {
    ensure();
    return cells_.at({algo, sampler, beta0});
  }
  const std::map<CellKey, std::vector<RunOutcome>>& all() {
    ensure();
    return cells_;
  }

 private:
  void ensure() {
    if (!cells_.empty()) return;
    const std::vector<CellKey> keys{
        {Algo::Baseline, SamplerKind::Tpe, 0.0},   {Algo::Baseline, SamplerKind::Tpe, 3.0},
        {Algo::Baseline, SamplerKind::Tpe, 20.0},  {Algo::Baseline, SamplerKind::Random, 3.0},
        {Algo::Cir, SamplerKind::Tpe, -3.0},       {Algo::Cir, SamplerKind::Tpe, 0.0},
        {Algo::Cir, SamplerKind::Tpe, 3.0},        {Algo::Cir, SamplerKind::Tpe, 20.0},
        {Algo::CirNoCso, SamplerKind::Tpe, 20.0},  {Algo::CirNoAir, SamplerKind::Tpe, 20.0}};
    std::vector<RunOutcome> runs(keys.size() * kHpoSeeds);
    const auto start = std::chrono::steady_clock::now();
    parallel_for(runs.size(), g_workers, [&](std::size_t job) {
      const CellKey& key = keys[job / kHpoSeeds];
      const ExperimentConfig c = hpo_config(key.sampler);
      runs[job] = run_single_hpo(c, key.algo, key.beta0, c.seed + job % kHpoSeeds);
    });
    for (std::size_t job = 0; job < runs.size(); ++job) cells_[keys[job / kHpoSeeds]].push_back(std::move(runs[job]));
    std::printf("# %zu HPO runs (T=%zu, n=1000) in %.0f s\n", runs.size(), kHpoTrials,
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }

  std::map<CellKey, std::vector<RunOutcome>> cells_;
};

HpoRuns g_runs;

struct Final {
  double val;
  double gen;
  double ci_gen;
};

Final final_values(const std::vector<RunOutcome>& runs) {
  std::vector<double> val;
  std::vector<double> gen;
  for (const auto& r : runs) {
    val.push_back(r.norm_val.back());
    gen.push_back(r.norm_gen.back());
  }
  return {mean(val), mean(gen), 1.96 * std_error(gen)};
}

std::vector<double> gen_finals(const std::vector<RunOutcome>& runs) {
  std::vector<double> g;
  for (const auto& r : runs) g.push_back(r.norm_gen.back());
  return g;
}

// ---------------------------------------------------------------- prop checks (shared by 1 and 10)

const PropChecks& prop_checks() {
  static const PropChecks result = [] {
    ExperimentConfig c;
    c.beta0 = {3.0};
    c.grid_size = 20;
    c.n_train = 1000;
    c.n_val = 1000;
    c.seeds = 50;
    c.reps = 200;
    c.delta = 0.05;
    c.n_test = 100000;
    c.workers = g_workers;
    return execute_prop_checks(c);
  }();
  return result;
}

// ---------------------------------------------------------------- criteria

Verdict criterion_1() {
  double worst = 0.0;
  std::size_t n_runs = 0;
  for (const auto& [key, runs] : g_runs.all()) {
    for (const auto& r : runs) {
      worst = std::max(worst, std::abs(r.regret.residual));
      ++n_runs;
    }
  }
  const PropChecks& p = prop_checks();
  worst = std::max(worst, p.summary.max_residual);
  return {worst < 1e-10, fmt("max |r_gen - (r_val + dtau + C)| = %.3g over %zu HPO runs and %zu grid replications "
                             "(need < 1e-10)",
                             worst, n_runs, p.rows.size())};
}

Verdict criterion_2() {
  const RunSeeds seeds = run_seeds(2, 2, false);
  const SyntheticEnvironment env = sample_environment(seeds.environment);
  const PolicyPtr logging = softmax_logging_policy(env, 3.0);
  const LoggedDataset train = sample_logged_data(env, *logging, 1000, seeds.train);
  const auto model = fit_logistic(train, LogisticHyperparams{}, derive_seed(seeds.train, 1));
  const PolicyPtr target = softmax_policy(model, 10.0);
  const GroundTruth truth(env, 500000, seeds.truth);
  const double v = truth.value(*target);

  constexpr std::size_t kReps = 1000;
  std::vector<double> ips_means(kReps);
  std::vector<double> dr_means(kReps);
  parallel_for(kReps, g_workers, [&](std::size_t rep) {
    const LoggedDataset val = sample_logged_data(env, *logging, 1000, derive_seed(seeds.val, rep));
    const PolicyTable table = tabulate(*target, val.contexts());
    ips_means[rep] = ips(table, val).mean;
    dr_means[rep] = dr(table, val, predict_table(*model, val.contexts())).mean;
  });
  const double ips_gap = std::abs(mean(ips_means) - v) / std_error(ips_means);
  const double dr_gap = std::abs(mean(dr_means) - v) / std_error(dr_means);
  return {ips_gap <= 3.0 && dr_gap <= 3.0,
          fmt("V = %.5f; IPS mean %.5f (%.2f SE), DR mean %.5f (%.2f SE) over %zu reps (need <= 3 SE)", v,
              mean(ips_means), ips_gap, mean(dr_means), dr_gap, kReps)};
}

Verdict criterion_3() {
  ExperimentConfig c;
  c.beta0 = {0.0, 3.0, 20.0};
  c.n_grid = {400, 1600, 6400};
  c.reps = 200;
  c.delta = 0.05;
  c.n_test = 1000000;
  c.workers = g_workers;
  const std::vector<BoundsRow> rows = execute_bounds_study(c);

  bool ok_a = true;
  bool ok_b = true;
  bool ok_c = true;
  std::ostringstream detail;
  for (double b0 : c.beta0) {
    for (std::size_t n : c.n_grid) {
      std::size_t viol[3] = {0, 0, 0};
      std::size_t order = 0;
      std::size_t reps = 0;
      for (std::size_t i = 0; i + 2 < rows.size(); i += 3) {
        if (rows[i].beta0 != b0 || rows[i].n != n) continue;
        ++reps;
        for (int m = 0; m < 3; ++m) viol[m] += rows[i + m].violated ? 1 : 0;
        const double t = rows[i].lower_bound;
        const double h = rows[i + 1].lower_bound;
        const double b = rows[i + 2].lower_bound;
        order += (t >= b && b >= h) ? 1 : 0;
      }
      const double t_rate = static_cast<double>(viol[0]) / static_cast<double>(reps);
      ok_a = ok_a && viol[1] == 0 && viol[2] == 0;
      ok_b = ok_b && t_rate <= 2.0 * c.delta;
      if (b0 == 3.0 || b0 == 20.0) ok_c = ok_c && order == reps;
      detail << fmt(" [b0=%g n=%zu: t %zu H %zu B %zu order %zu/%zu]", b0, n, viol[0], viol[1], viol[2], order, reps);
    }
  }
  return {ok_a && ok_b && ok_c, fmt("(a) H/B zero errors %s, (b) t rate <= 2 delta %s, (c) t >= B >= H %s;",
                                    ok_a ? "yes" : "NO", ok_b ? "yes" : "NO", ok_c ? "yes" : "NO") +
                                    detail.str()};
}

Verdict criterion_4() {
  ExperimentConfig c;
  c.beta0 = {-3.0, 0.0, 3.0, 10.0, 20.0};
  c.env_seeds = 25;
  c.n_test = 100000;
  c.workers = g_workers;
  const auto rows = execute_optimality_table(c);
  const double want_v[] = {0.412, 0.501, 0.580, 0.677, 0.719};
  const double want_r[] = {0.554, 0.673, 0.831, 0.910, 0.966};
  bool ok = true;
  std::ostringstream detail;
  for (std::size_t b = 0; b < rows.size(); ++b) {
    const bool v_ok = std::abs(rows[b].mean_v_pi0 - want_v[b]) <= 0.05;
    const bool r_ok = std::abs(rows[b].mean_ratio - want_r[b]) <= 0.05;
    ok = ok && v_ok && r_ok;
    if (b > 0) ok = ok && rows[b].mean_ratio > rows[b - 1].mean_ratio;
    detail << fmt(" [b0=%g V %.3f vs %.3f%s, ratio %.3f vs %.3f%s]", rows[b].beta0, rows[b].mean_v_pi0, want_v[b],
                  v_ok ? "" : " OUT", rows[b].mean_ratio, want_r[b], r_ok ? "" : " OUT");
  }
  return {ok, "25 environments, +-0.05, ratio increasing;" + detail.str()};
}

Verdict criterion_5() {
  const Final f = final_values(g_runs.cell(Algo::Baseline, SamplerKind::Tpe, 3.0));
  return {f.val - f.gen >= 0.10,
          fmt("Baseline-TPE b0=3: final norm val %.4f - gen %.4f = %.4f (need >= 0.10)", f.val, f.gen, f.val - f.gen)};
}

Verdict criterion_6() {
  const Final f = final_values(g_runs.cell(Algo::Baseline, SamplerKind::Tpe, 20.0));
  return {f.gen < 1.0 && f.gen + f.ci_gen < 1.0,
          fmt("Baseline-TPE b0=20: final norm gen %.4f, CI upper %.4f (need both < 1)", f.gen, f.gen + f.ci_gen)};
}

Verdict criterion_7() {
  const Final cir20 = final_values(g_runs.cell(Algo::Cir, SamplerKind::Tpe, 20.0));
  const Final base20 = final_values(g_runs.cell(Algo::Baseline, SamplerKind::Tpe, 20.0));
  const Final cir0 = final_values(g_runs.cell(Algo::Cir, SamplerKind::Tpe, 0.0));
  const Final base0 = final_values(g_runs.cell(Algo::Baseline, SamplerKind::Tpe, 0.0));
  // Half-width of the 95% CI of the difference of two independent means.
  const double joint = std::hypot(cir20.ci_gen, base20.ci_gen);
  const bool ok = cir20.gen >= 0.98 && cir20.gen - base20.gen > joint && cir0.gen > 1.10 && base0.gen > 1.10;
  return {ok, fmt("b0=20: CIR %.4f (need >= 0.98), Baseline %.4f, margin %.4f vs joint CI %.4f; b0=0: CIR %.4f, "
                  "Baseline %.4f (need > 1.10)",
                  cir20.gen, base20.gen, cir20.gen - base20.gen, joint, cir0.gen, base0.gen)};
}

Verdict criterion_8() {
  auto alpha_mean = [](double beta0) {
    std::vector<double> a;
    for (const auto& r : g_runs.cell(Algo::Cir, SamplerKind::Tpe, beta0)) a.push_back(r.final_alpha);
    return mean(a);
  };
  const double a20 = alpha_mean(20.0);
  const double a3 = alpha_mean(3.0);
  const double am3 = alpha_mean(-3.0);
  return {a20 > a3 && a3 > am3 && a20 > 0.5 && am3 < 0.5,
          fmt("mean alpha_T: b0=20 %.4f > b0=3 %.4f > b0=-3 %.4f, with b0=20 > 0.5 and b0=-3 < 0.5", a20, a3, am3)};
}

Verdict criterion_9() {
  const double cir = mean(gen_finals(g_runs.cell(Algo::Cir, SamplerKind::Tpe, 20.0)));
  const double no_cso = mean(gen_finals(g_runs.cell(Algo::CirNoCso, SamplerKind::Tpe, 20.0)));
  const double no_air = mean(gen_finals(g_runs.cell(Algo::CirNoAir, SamplerKind::Tpe, 20.0)));
  const bool ok = cir >= no_cso && no_cso >= no_air && (cir - no_air) > (cir - no_cso);
  return {ok, fmt("b0=20 final norm gen: CIR %.4f >= w/o CSO %.4f >= w/o AIR %.4f; AIR removal costs %.4f vs CSO "
                  "%.4f",
                  cir, no_cso, no_air, cir - no_air, cir - no_cso)};
}

Verdict criterion_10() {
  const PropSummary& s = prop_checks().summary;
  return {s.upper_holds && s.lower_holds && s.coverage_holds,
          fmt("|Theta|=20, n=1000, %zu seeds: mean Vhat(sel) %.4f (SE %.4f) >= V* %.4f %s; V* >= mean V(sel) %.4f (SE "
              "%.4f) %s; clipped violations %.3f over %zu reps (need <= 0.05)",
              s.sandwich_reps, s.mean_v_hat_selected, s.se_v_hat_selected, s.v_true_best, s.upper_holds ? "ok" : "NO",
              s.mean_v_true_selected, s.se_v_true_selected, s.lower_holds ? "ok" : "NO", s.violation_rate,
              s.coverage_reps)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict criterion_11() {
  const std::string data = CIROPT_TEST_DATA;
  const std::vector<std::vector<std::string>> commands{
      {"run", "--algo", "baseline,cir,cir-no-cso,cir-no-air", "--beta0", "0,20", "--trials", "15", "--seeds", "2",
       "--n-train", "300", "--n-val", "300", "--n-test", "5000"},
      {"run", "--sampler", "random", "--estimator", "dr", "--fix-env", "--trials", "10", "--seeds", "2", "--n-train",
       "200", "--n-val", "200", "--n-test", "2000"},
      {"bounds", "--n", "200,800", "--reps", "20", "--delta", "0.05", "--n-test", "5000"},
      {"table", "--env-seeds", "4", "--n-test", "5000"},
      {"props", "--grid-size", "5", "--seeds", "6", "--reps", "10", "--n-val", "300", "--n-test", "5000"},
      {"obd", "--train", data + "/obd_ts_50.csv", "--test", data + "/obd_random_40.csv", "--numeric-columns",
       "user-item_affinity_0,user-item_affinity_1,user-item_affinity_2", "--trials", "6"}};
  std::size_t files = 0;
  for (const auto& cmd : commands) {
    TempDir a("acc-a");
    TempDir b("acc-b");
    std::vector<std::string> outputs;
    for (const TempDir* dir : {&a, &b}) {
      std::vector<std::string> args{"ciropt"};
      args.insert(args.end(), cmd.begin(), cmd.end());
      args.insert(args.end(), {"--out", dir->path().string(), "--workers", dir == &a ? "1" : std::to_string(g_workers + 1)});
      std::vector<const char*> argv;
      for (const auto& s : args) argv.push_back(s.c_str());
      std::ostringstream out;
      std::ostringstream err;
      if (cli::parse_and_dispatch(static_cast<int>(argv.size()), argv.data(), out, err) != 0)
        return {false, "command failed: " + cmd.front() + ": " + err.str()};
    }
    for (const auto& entry : std::filesystem::directory_iterator(a.path())) {
      const auto name = entry.path().filename();
      if (slurp(entry.path()) != slurp(b.path() / name))
        return {false, cmd.front() + ": " + name.string() + " differs between identical runs"};
      ++files;
    }
  }
  return {files > 0, fmt("%zu CSVs byte-identical across repeated runs of run/bounds/table/props/obd (1 vs %zu workers)",
                         files, g_workers + 1)};
}

Verdict criterion_12() {
  auto taus = [](SamplerKind sampler) {
    std::vector<double> t;
    for (const auto& r : g_runs.cell(Algo::Baseline, sampler, 3.0)) {
      for (const auto& rec : r.trials) t.push_back(rec.v_ips_val - *rec.v_true);
    }
    return t;
  };
  const std::vector<double> tpe = taus(SamplerKind::Tpe);
  const std::vector<double> rs = taus(SamplerKind::Random);
  const double p_tpe = percentile(tpe, 0.95);
  const double p_rs = percentile(rs, 0.95);
  return {p_tpe > p_rs, fmt("b0=3 pooled tau 95th percentile: TPE %.4f vs RS %.4f over %zu trials each", p_tpe, p_rs,
                            tpe.size())};
}

}  // namespace

int main(int argc, char** argv) {
  g_workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CIROPT_WORKERS")) g_workers = std::max(1, std::atoi(env));
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--workers" && i + 1 < argc) {
      g_workers = std::max(1, std::atoi(argv[++i]));
    } else {
      selected.insert(std::atoi(arg.c_str()));
    }
  }
  const std::vector<std::function<Verdict()>> criteria{criterion_1, criterion_2,  criterion_3, criterion_4,
                                                       criterion_5, criterion_6,  criterion_7, criterion_8,
                                                       criterion_9, criterion_10, criterion_11, criterion_12};
  std::ofstream report("acceptance_report.txt");
  auto emit = [&](const std::string& line) {
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    report << line << "\n" << std::flush;
  };
  std::size_t passed = 0;
  std::size_t evaluated = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    const Verdict v = criteria[i]();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    emit(fmt("%s criterion %2d: ", v.pass ? "PASS" : "FAIL", id) + v.detail + fmt(" (%.0f s)", secs));
    ++evaluated;
    passed += v.pass ? 1 : 0;
  }
  emit(fmt("%zu/%zu criteria PASS", passed, evaluated));
  return 0;
}
