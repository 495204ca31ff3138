#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ciropt/harness.hpp"
#include "ciropt/obd.hpp"

namespace ciropt::cli {

enum class Command { Run, Bounds, Table, Props, Obd };

std::string_view to_string(Command command);

/// Bad flags, bad flag values or a bad config file: exit code 2.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct ObdInvocation {
  std::filesystem::path train;
  std::filesystem::path test;
  ObdColumnMap columns;
  std::size_t max_rows = 0;
  ObdExperimentConfig experiment;
  std::filesystem::path out = "results";

  bool operator==(const ObdInvocation& other) const;
};

struct Invocation {
  Command command = Command::Run;
  ExperimentConfig config;  // unused by obd
  ObdInvocation obd;        // obd only
  bool dump_config = false;
};

/// Per-command defaults: `table` sweeps beta0 over {-3, 0, 3, 10, 20}, `props` uses beta0 = 3.
ExperimentConfig default_config(Command command);

/// TOML with one key per flag (dashes become underscores); doubles keep 17 digits.
std::string dump_config(Command command, const ExperimentConfig& config);
std::string dump_obd_config(const ObdInvocation& obd);

/// Parses and validates; throws UsageError. argv[0] is the program name.
Invocation parse_invocation(const std::vector<std::string>& args);

/// 0 on success, 2 on a usage error, 1 on a runtime failure.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ciropt::cli
