#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "slp/numerics/linalg.hpp"
#include "slp/simulation.hpp"

namespace slp::cli {

/// Exit codes of every subcommand.
enum ExitCode : int { kOk = 0, kValidationFailure = 1, kUsageError = 2, kSolverFailure = 3 };

/// A config or argument problem; the message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario plus the output destination.
struct RunConfig {
  simulation::ScenarioConfig scenario;
  std::string output_path;  // empty: stdout

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Exit code for an exception escaping a subcommand: configuration and
/// argument errors map to kUsageError, everything else to kSolverFailure.
int exit_code_for(const std::exception& error);

/// Parses "pi/5", "3pi/8", "pi", "0" or a plain radian value.
double parse_phi(std::string_view text);

/// Flat `key = value` text, `#` comments, comma-separated lists. Unknown or
/// repeated keys and invalid values throw ConfigError. The scenario is
/// validated before returning.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Inverse of parse_config: parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// 12 significant digits; "nan" and "inf"/"-inf" for non-finite values.
std::string format_number(double value);

/// Column names, in order, for K users.
std::vector<std::string> csv_header(int users);

/// Header plus one LF-terminated row per (axis point, method).
std::string results_csv(const std::vector<simulation::SweepResult>& results, int users);

/// Parses a complex number written as a+bi (also a, bi, i, -i, a-bi; j is
/// accepted for i). Throws ConfigError.
numerics::Complex parse_complex(std::string_view text);

/// Comma-separated complex entries.
numerics::ComplexVector parse_complex_list(std::string_view text);

struct SweepFlags {
  int threads = 0;                    // 0: SLP_THREADS or the OpenMP default
  std::optional<std::string> output;  // overrides output_path
  bool noise_free = false;            // sweep-ee only
};

int cmd_sweep_power(const std::filesystem::path& config, const SweepFlags& flags,
                    std::ostream& out, std::ostream& err);
int cmd_sweep_ee(const std::filesystem::path& config, const SweepFlags& flags, std::ostream& out,
                 std::ostream& err);

struct ClassifyArgs {
  std::string h_j;  // channel row of the observed user
  std::string w_k;  // precoding vector of the interfering stream
  int d_j = 0;      // symbol indices
  int d_k = 0;
  int order = 4;
};

int cmd_classify(const ClassifyArgs& args, std::ostream& out, std::ostream& err);

struct ValidateOptions {
  bool quick = false;
  std::uint64_t seed = 1;
  std::optional<int> instances;  // overrides every per-property count
  bool inject_fault = false;     // halves cipm's transmit vector (harness self-test)
  std::string replay_out = "slpsim-replay.json";
  std::optional<std::string> replay_in;  // re-run one serialized failure
};

int cmd_validate(const ValidateOptions& options, std::ostream& out, std::ostream& err);

}  // namespace slp::cli
