#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gsmd/objectives.hpp"
#include "gsmd/optimizers.hpp"

namespace gsmd {

enum class Check { grad_bound, descent, e_seq, theorem_bound, self_bounding, prox_oracle, local_smooth };

std::string to_string(Check c);
Check check_from_string(const std::string& name);
/// Whether a check has anything to look at in a run of this algorithm.
bool check_applies(Check c, Algorithm a);

/// One run section after seed-range expansion. Values are kept as parsed so a
/// spec renders back to the same text.
struct RunSpec {
  std::string name;
  std::string group;  ///< empty when the run is not part of a seed sweep
  std::string algorithm;
  long long T = 0;
  std::optional<double> eta;  ///< empty means paper_default
  std::uint64_t seed = 0;
  std::string objective;
  ParamTable objective_params;
  std::string geometry;
  std::optional<double> radius;
  std::vector<double> center;
  std::string link = "analytic";
  ParamTable link_params;
  std::vector<double> sigma_coeffs;  ///< empty means no noise
  std::string noise_shape;
  std::vector<double> noise_direction;

  bool operator==(const RunSpec&) const = default;
};

struct SlopeWindow {
  long long t_min = 0;
  long long t_max = 0;
  bool operator==(const SlopeWindow&) const = default;
};

struct ExperimentSpec {
  std::vector<Check> checks;
  std::vector<std::string> formats{"csv", "json"};
  std::string dir = "out";
  std::vector<SlopeWindow> slope_windows;
  std::vector<RunSpec> runs;

  bool operator==(const ExperimentSpec&) const = default;
};

/// Parse the key-table config format (see README). Throws ParseError with the
/// offending line and key for syntax errors and unknown keys, and
/// ValidationError for semantically invalid runs such as an explicit eta above
/// the algorithm's cap.
ExperimentSpec parse_spec(const std::string& text);
ExperimentSpec load_spec(const std::string& path);

/// Canonical text form; parse_spec(render(s)) == s.
std::string render(const ExperimentSpec& spec);

Objective build_objective(const RunSpec& run);
Geometry build_geometry(const RunSpec& run, int dim);
LinkFunction build_link(const RunSpec& run, const Objective& obj, const Geometry& geom);
RunConfig build_run_config(const RunSpec& run);

}  // namespace gsmd
