#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsmd/config.hpp"
#include "gsmd/optimizers.hpp"

namespace gsmd {

/// Exit statuses of the CLI.
enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfigError = 2, kExitRuntimeError = 3 };

/// Environment variable that, when set, prefixes relative output directories.
inline constexpr const char* kOutputRootEnv = "GSMD_OUTPUT_ROOT";

struct SlopeReport {
  std::string algorithm;
  SlopeWindow window;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int points = 0;
};

/// Least squares of ln gap on ln t over checkpoints with t in the window and
/// gap > 1e-14. Throws DegenerateError with fewer than 5 such checkpoints.
SlopeReport slope_of_curve(const std::string& algorithm, const std::vector<long long>& t,
                           const std::vector<double>& gap, SlopeWindow window);
/// Slope of the run's rate gap (see theorem_gap).
SlopeReport slope(const RunRecord& record, SlopeWindow window);

struct CheckOutcome {
  Check check;
  bool passed = true;
  nlohmann::json detail;
};

struct RunOutcome {
  std::string name;
  std::string group;
  std::optional<RunRecord> record;
  std::vector<CheckOutcome> checks;
  std::vector<SlopeReport> slopes;
  nlohmann::json slope_notes = nlohmann::json::array();
  std::string error;  ///< non-empty when the run raised
  bool passed() const;
};

/// Median rate-gap curve over the members of a seed group.
struct GroupOutcome {
  std::string name;
  std::string algorithm;
  int members = 0;
  std::vector<long long> t;
  std::vector<double> median_gap;
  std::vector<SlopeReport> slopes;
  nlohmann::json slope_notes = nlohmann::json::array();
};

struct ExecuteOptions {
  bool parallel = true;
  /// Write per-run trajectory CSVs; the check subcommand turns this off.
  bool persist_trajectories = true;
};

struct ExecuteResult {
  int exit_code = kExitOk;
  std::string output_dir;  ///< empty when nothing was written
  std::vector<RunOutcome> runs;
  std::vector<GroupOutcome> groups;
};

/// Runs every run of the spec (fanned out over OpenMP threads when parallel),
/// evaluates the requested checks and slopes, and writes the artifacts.
ExecuteResult execute(const ExperimentSpec& spec, const ExecuteOptions& opt = {});

/// One run end to end without touching the filesystem.
RunOutcome evaluate_run(const RunSpec& run, const std::vector<Check>& checks,
                        const std::vector<SlopeWindow>& windows,
                        const std::optional<ReferenceOptimum>& fstar = std::nullopt);

/// Applies kOutputRootEnv to a relative directory.
std::string resolve_output_dir(const std::string& dir);

/// CSV columns: t,f_gap,avg_gap,grad_dual_norm,aux_grad_dual_norm,step,move,e_t,bound.
/// Missing values are written as NA.
void write_run_csv(std::ostream& out, const RunRecord& record);
nlohmann::json run_summary(const RunSpec& spec, const RunOutcome& outcome);

}  // namespace gsmd
