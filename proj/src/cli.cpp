#include "ciropt/cli.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ciropt/csv.hpp"
#include "ciropt/error.hpp"

namespace ciropt::cli {

namespace {

std::string toml_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

// Shortest of 15..17 significant digits that parses back to v.
std::string toml_double(double v) {
  char buf[40];
  for (int digits = 15; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

template <class T, class F>
std::string toml_array(const std::vector<T>& values, F&& format) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) out += (i ? ", " : "") + format(values[i]);
  return out + "]";
}

std::vector<std::string> non_empty(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& s : items) {
    if (!s.empty()) out.push_back(s);
  }
  return out;
}

struct ExperimentFlags {
  ExperimentConfig cfg;
  std::vector<std::string> algos;
  std::string sampler;
  std::string estimator;
  std::string out;
};

struct ObdFlags {
  ObdInvocation inv;
  std::string train;
  std::string test;
  std::string sampler;
  std::string out;
};

struct SubcommandState {
  CLI::App* app = nullptr;
  std::string config_path;
  bool dump = false;
  ExperimentFlags exp;
  ObdFlags obd;
};

const std::vector<Command> kCommands{Command::Run, Command::Bounds, Command::Table, Command::Props, Command::Obd};

std::string_view description(Command c) {
  switch (c) {
    case Command::Run:
      return "Run Baseline / CIR-HPO across beta0 cells and seeds (trials.csv, summary.csv, regret.csv)";
    case Command::Bounds:
      return "Lower-bound coverage study (bounds.csv)";
    case Command::Table:
      return "V(pi_0) and V(pi_0)/V(pi*) across environment seeds (table.csv)";
    case Command::Props:
      return "Finite-grid regret identity, optimism sandwich and clipped coverage (props.csv)";
    case Command::Obd:
      return "Tune on logged OBD-format data, evaluate on uniform logs (obd_report.csv)";
  }
  return "";
}

void add_experiment_flags(CLI::App* app, ExperimentFlags& f, Command command) {
  ExperimentConfig& c = f.cfg;
  c = default_config(command);
  f.algos.clear();
  for (Algo a : c.algos) f.algos.emplace_back(to_string(a));
  f.sampler = std::string(to_string(c.sampler));
  f.estimator = std::string(to_string(c.estimator));
  f.out = c.out.string();

  app->add_option("--beta0", c.beta0, "Logging inverse temperatures")->delimiter(',')->capture_default_str();
  app->add_option("--algo", f.algos, "baseline, cir, cir-no-cso, cir-no-air")->delimiter(',')->capture_default_str();
  app->add_option("--sampler", f.sampler, "random or tpe")->capture_default_str();
  app->add_option("--estimator", f.estimator, "HPO surrogate: ips or dr")->capture_default_str();
  app->add_option("--trials", c.trials, "HPO budget T")->capture_default_str();
  app->add_option("--n-train", c.n_train, "|D_tr|")->capture_default_str();
  app->add_option("--n-val", c.n_val, "|D_val|")->capture_default_str();
  app->add_option("--seeds", c.seeds, "Number of run seeds")->capture_default_str();
  app->add_option("--seed", c.seed, "First run seed")->capture_default_str();
  app->add_option("--delta", c.delta, "Confidence level, in (0, 0.5]")->capture_default_str();
  app->add_option("--gamma", c.gamma, "AIR schedule exponent")->capture_default_str();
  app->add_option("--alpha-init", c.alpha_init, "AIR initial mixing weight")->capture_default_str();
  app->add_flag("--fix-env", c.fix_env, "Share one environment across seeds");
  app->add_option("--n-test", c.n_test, "Contexts in the ground-truth pool")->capture_default_str();
  app->add_option("--workers", c.workers, "Worker threads")->envname("CIROPT_WORKERS")->capture_default_str();
  app->add_option("--out", f.out, "Output directory")->capture_default_str();
  app->add_option("--context-dim", c.context_dim)->capture_default_str();
  app->add_option("--embedding-dim", c.embedding_dim)->capture_default_str();
  app->add_option("--n-actions", c.n_actions)->capture_default_str();
  app->add_option("--n", c.n_grid, "Validation sizes for the bounds study")->delimiter(',')->capture_default_str();
  app->add_option("--reps", c.reps, "Replications")->capture_default_str();
  app->add_option("--eval-beta", c.eval_beta, "Inverse temperature of the evaluation policy")->capture_default_str();
  app->add_option("--env-seeds", c.env_seeds, "Environment seeds for the optimality table")->capture_default_str();
  app->add_option("--grid-size", c.grid_size, "Finite grid size for the proposition checks")->capture_default_str();
}

void add_obd_flags(CLI::App* app, ObdFlags& f) {
  ObdInvocation& o = f.inv;
  f.sampler = std::string(to_string(o.experiment.sampler));
  f.out = o.out.string();
  app->add_option("--train", f.train, "Logging-policy CSV log");
  app->add_option("--test", f.test, "Uniform-logging CSV log");
  app->add_option("--numeric-columns", o.columns.numeric, "Numeric context columns")->delimiter(',');
  app->add_option("--categorical-columns", o.columns.categorical, "One-hot context columns")
      ->delimiter(',')
      ->capture_default_str();
  app->add_option("--action-column", o.columns.action)->capture_default_str();
  app->add_option("--reward-column", o.columns.reward)->capture_default_str();
  app->add_option("--propensity-column", o.columns.propensity)->capture_default_str();
  app->add_option("--position-column", o.columns.position, "Empty disables the position filter")->capture_default_str();
  app->add_option("--position-value", o.columns.position_value)->capture_default_str();
  app->add_option("--max-rows", o.max_rows, "Subsample each log to this many rows (0: all)")->capture_default_str();
  app->add_option("--trials", o.experiment.trials)->capture_default_str();
  app->add_option("--sampler", f.sampler, "random or tpe")->capture_default_str();
  app->add_option("--delta", o.experiment.delta)->capture_default_str();
  app->add_option("--gamma", o.experiment.gamma)->capture_default_str();
  app->add_option("--alpha-init", o.experiment.alpha_init)->capture_default_str();
  app->add_option("--seed", o.experiment.seed)->capture_default_str();
  app->add_option("--workers", o.experiment.workers)->envname("CIROPT_WORKERS")->capture_default_str();
  app->add_option("--out", f.out, "Output directory")->capture_default_str();
}

void apply_config_file(CLI::App* app, const std::string& path) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(path);
  } catch (const CLI::Error& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
  for (const CLI::ConfigItem& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty()) throw UsageError("config file " + path + ": sections are not supported");
    std::string name = item.name;
    for (char& ch : name) ch = ch == '_' ? '-' : ch;
    CLI::Option* opt = name == "config" || name == "dump-config" ? nullptr : app->get_option_no_throw("--" + name);
    if (opt == nullptr) throw UsageError("config file " + path + ": unknown key '" + item.name + "'");
    if (opt->count() > 0) continue;  // the command line wins
    try {
      if (item.inputs.empty()) {
        opt->add_result(std::string{});
      } else {
        opt->add_result(item.inputs);
      }
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config file " + path + ": key '" + item.name + "': " + e.what());
    }
  }
}

ExperimentConfig finish_experiment(const ExperimentFlags& f) {
  ExperimentConfig c = f.cfg;
  try {
    c.algos.clear();
    for (const auto& a : non_empty(f.algos)) c.algos.push_back(parse_algo(a));
    c.sampler = parse_sampler(f.sampler);
    c.estimator = parse_surrogate(f.estimator);
    c.out = f.out;
    validate_config(c);
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  return c;
}

ObdInvocation finish_obd(const ObdFlags& f) {
  ObdInvocation o = f.inv;
  o.columns.numeric = non_empty(o.columns.numeric);
  o.columns.categorical = non_empty(o.columns.categorical);
  o.train = f.train;
  o.test = f.test;
  o.out = f.out;
  try {
    o.experiment.sampler = parse_sampler(f.sampler);
  } catch (const InvalidInput& e) {
    throw UsageError(e.what());
  }
  const auto& x = o.experiment;
  if (o.train.empty() || o.test.empty()) throw UsageError("obd needs --train and --test");
  if (x.trials < 1) throw UsageError("trials must be >= 1");
  if (!(x.delta > 0.0 && x.delta <= 0.5)) throw UsageError("delta must lie in (0, 0.5]");
  if (!(x.gamma > 0.0 && std::isfinite(x.gamma))) throw UsageError("gamma must be positive");
  if (!(x.alpha_init >= 0.0 && x.alpha_init <= 1.0)) throw UsageError("alpha-init must lie in [0, 1]");
  if (x.workers < 1) throw UsageError("workers must be >= 1");
  if (o.columns.numeric.empty() && o.columns.categorical.empty()) throw UsageError("no context columns");
  return o;
}

class Parser {
 public:
  Parser() : app_("Counterfactual HPO experiments for off-policy learning", "ciropt") {
    app_.require_subcommand(1);
    for (Command c : kCommands) {
      SubcommandState& s = states_[c];
      s.app = app_.add_subcommand(std::string(to_string(c)), std::string(description(c)));
      s.app->add_option("--config", s.config_path, "TOML file; keys are flag names with '_' for '-'");
      s.app->add_flag("--dump-config", s.dump, "Print the effective configuration as TOML and exit");
      if (c == Command::Obd) {
        add_obd_flags(s.app, s.obd);
      } else {
        add_experiment_flags(s.app, s.exp, c);
      }
    }
  }

  CLI::App& app() { return app_; }

  Invocation parse(int argc, const char* const* argv) {
    app_.parse(argc, argv);
    for (Command c : kCommands) {
      SubcommandState& s = states_[c];
      if (!s.app->parsed()) continue;
      if (!s.config_path.empty()) apply_config_file(s.app, s.config_path);
      Invocation inv;
      inv.command = c;
      inv.dump_config = s.dump;
      if (c == Command::Obd) {
        inv.obd = finish_obd(s.obd);
      } else {
        inv.config = finish_experiment(s.exp);
      }
      return inv;
    }
    throw UsageError("no subcommand");
  }

 private:
  CLI::App app_;
  std::map<Command, SubcommandState> states_;
};

void run_command(const Invocation& inv, std::ostream& out) {
  const ExperimentConfig& c = inv.config;
  switch (inv.command) {
    case Command::Run: {
      const HpoExperiment r = run_hpo_experiment(c);
      out << "runs: " << r.runs.size() << ", wrote trials.csv, summary.csv, regret.csv to " << c.out.string() << "\n";
      break;
    }
    case Command::Bounds: {
      const auto rows = run_bounds_study(c);
      out << "rows: " << rows.size() << ", wrote bounds.csv to " << c.out.string() << "\n";
      break;
    }
    case Command::Table: {
      const auto rows = run_optimality_table(c);
      for (const auto& r : rows) {
        out << "beta0 " << format_double(r.beta0) << ": V(pi_0) " << format_double(r.mean_v_pi0) << ", ratio "
            << format_double(r.mean_ratio) << "\n";
      }
      out << "wrote table.csv to " << c.out.string() << "\n";
      break;
    }
    case Command::Props: {
      const PropChecks p = run_prop_checks(c);
      const PropSummary& s = p.summary;
      out << "sandwich upper " << (s.upper_holds ? "holds" : "fails") << ", lower "
          << (s.lower_holds ? "holds" : "fails") << "; max identity residual " << format_double(s.max_residual)
          << "; clipped violation rate " << format_double(s.violation_rate) << "\n";
      out << "wrote props.csv, props_summary.csv to " << c.out.string() << "\n";
      break;
    }
    case Command::Obd: {
      const ObdInvocation& o = inv.obd;
      const auto [train, test] = load_obd_pair(o.train, o.test, o.columns, o.max_rows, o.experiment.seed);
      out << "train rows " << train.data.size() << " (rejected " << train.rejected << "), test rows "
          << test.data.size() << " (rejected " << test.rejected << ")\n";
      const auto rows = obd_experiment(train.data, test.data, o.experiment);
      write_obd_report(o.out / "obd_report.csv", rows);
      for (const auto& r : rows) {
        out << to_string(r.algo) << " / " << to_string(r.surrogate) << ": " << format_double(r.test_value_ips) << "\n";
      }
      break;
    }
  }
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Run:
      return "run";
    case Command::Bounds:
      return "bounds";
    case Command::Table:
      return "table";
    case Command::Props:
      return "props";
    case Command::Obd:
      return "obd";
  }
  return "?";
}

bool ObdInvocation::operator==(const ObdInvocation& o) const {
  const auto& a = columns;
  const auto& b = o.columns;
  const auto& x = experiment;
  const auto& y = o.experiment;
  return train == o.train && test == o.test && a.numeric == b.numeric && a.categorical == b.categorical &&
         a.action == b.action && a.reward == b.reward && a.propensity == b.propensity && a.position == b.position &&
         a.position_value == b.position_value && max_rows == o.max_rows && x.trials == y.trials &&
         x.sampler == y.sampler && x.delta == y.delta && x.gamma == y.gamma && x.alpha_init == y.alpha_init &&
         x.seed == y.seed && x.workers == y.workers && out == o.out;
}

ExperimentConfig default_config(Command command) {
  ExperimentConfig c;
  if (command == Command::Table) c.beta0 = {-3.0, 0.0, 3.0, 10.0, 20.0};
  if (command == Command::Props) {
    c.beta0 = {3.0};
    c.seeds = 50;
  }
  return c;
}

std::string dump_config(Command command, const ExperimentConfig& c) {
  std::ostringstream s;
  auto str = [](std::string_view v) { return toml_string(std::string(v)); };
  s << "# ciropt " << to_string(command) << "\n";
  s << "beta0 = " << toml_array(c.beta0, toml_double) << "\n";
  s << "algo = " << toml_array(c.algos, [&](Algo a) { return str(to_string(a)); }) << "\n";
  s << "sampler = " << str(to_string(c.sampler)) << "\n";
  s << "estimator = " << str(to_string(c.estimator)) << "\n";
  s << "trials = " << c.trials << "\n";
  s << "n_train = " << c.n_train << "\n";
  s << "n_val = " << c.n_val << "\n";
  s << "seeds = " << c.seeds << "\n";
  s << "seed = " << c.seed << "\n";
  s << "delta = " << toml_double(c.delta) << "\n";
  s << "gamma = " << toml_double(c.gamma) << "\n";
  s << "alpha_init = " << toml_double(c.alpha_init) << "\n";
  s << "fix_env = " << (c.fix_env ? "true" : "false") << "\n";
  s << "n_test = " << c.n_test << "\n";
  s << "workers = " << c.workers << "\n";
  s << "out = " << toml_string(c.out.string()) << "\n";
  s << "context_dim = " << c.context_dim << "\n";
  s << "embedding_dim = " << c.embedding_dim << "\n";
  s << "n_actions = " << c.n_actions << "\n";
  s << "n = " << toml_array(c.n_grid, [](std::size_t n) { return std::to_string(n); }) << "\n";
  s << "reps = " << c.reps << "\n";
  s << "eval_beta = " << toml_double(c.eval_beta) << "\n";
  s << "env_seeds = " << c.env_seeds << "\n";
  s << "grid_size = " << c.grid_size << "\n";
  return s.str();
}

std::string dump_obd_config(const ObdInvocation& o) {
  std::ostringstream s;
  const auto& m = o.columns;
  const auto& x = o.experiment;
  s << "# ciropt obd\n";
  s << "train = " << toml_string(o.train.string()) << "\n";
  s << "test = " << toml_string(o.test.string()) << "\n";
  s << "numeric_columns = " << toml_array(m.numeric, toml_string) << "\n";
  s << "categorical_columns = " << toml_array(m.categorical, toml_string) << "\n";
  s << "action_column = " << toml_string(m.action) << "\n";
  s << "reward_column = " << toml_string(m.reward) << "\n";
  s << "propensity_column = " << toml_string(m.propensity) << "\n";
  s << "position_column = " << toml_string(m.position) << "\n";
  s << "position_value = " << m.position_value << "\n";
  s << "max_rows = " << o.max_rows << "\n";
  s << "trials = " << x.trials << "\n";
  s << "sampler = " << toml_string(std::string(to_string(x.sampler))) << "\n";
  s << "delta = " << toml_double(x.delta) << "\n";
  s << "gamma = " << toml_double(x.gamma) << "\n";
  s << "alpha_init = " << toml_double(x.alpha_init) << "\n";
  s << "seed = " << x.seed << "\n";
  s << "workers = " << x.workers << "\n";
  s << "out = " << toml_string(o.out.string()) << "\n";
  return s.str();
}

Invocation parse_invocation(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  Parser parser;
  try {
    return parser.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
}

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Parser parser;
  Invocation inv;
  try {
    inv = parser.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = parser.app().exit(e, out, err);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  }
  if (inv.dump_config) {
    out << (inv.command == Command::Obd ? dump_obd_config(inv.obd) : dump_config(inv.command, inv.config));
    return 0;
  }
  try {
    run_command(inv, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace ciropt::cli
