#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gsmd/geometry.hpp"
#include "gsmd/noise.hpp"
#include "gsmd/objectives.hpp"
#include "gsmd/smoothness.hpp"

namespace gsmd {

enum class Algorithm { md, amd, omd, mp, smd };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& name);

struct RunConfig {
  Algorithm algorithm;
  Objective objective;
  Geometry geometry;
  LinkFunction link;
  long long T = 1;
  /// Explicit step size; empty selects the theorem default.
  std::optional<double> eta;
  std::uint64_t seed = 0;
  std::optional<NoiseModel> noise;
  /// Keep a record for every t instead of the thinned checkpoint set.
  bool record_every_step = false;
  /// Precomputed reference optimum; computed on demand when empty.
  std::optional<ReferenceOptimum> fstar;
};

struct RunConstants {
  double fstar = 0.0;
  double fstar_gap = 0.0;
  std::string fstar_method;
  double F = 0.0;
  double G = 0.0;
  double L = 0.0;
  double factor = 2.0;
  double D_sq = 0.0;
  /// Step size: eta for md/omd/mp; the base eta of the accelerated schedule
  /// for amd (eta_t = t eta / (2L)); unused for smd.
  double eta = 0.0;
  long long tau = 0;  ///< amd only
};

struct IterationRecord {
  long long t = 0;
  double f_gap = 0.0;
  std::optional<double> avg_gap;
  double grad_dual_norm = 0.0;
  std::optional<double> aux_grad_dual_norm;
  double step = 0.0;
  double move = 0.0;
  std::optional<double> e_t;
};

/// Invariants evaluated at every step, including steps that are not kept as
/// checkpoints. Ratios are observed value over the asserted bound.
struct InvariantTally {
  long long steps = 0;
  int grad_bound_violations = 0;
  double max_grad_ratio = 0.0;
  int aux_grad_violations = 0;
  double max_aux_grad_ratio = 0.0;
  int descent_violations = 0;
  double max_descent_increase = -std::numeric_limits<double>::infinity();
  int e_seq_violations = 0;
  double max_e_ratio = 0.0;
  int stability_violations = 0;
  double max_stability_ratio = 0.0;
  int bound_violations = 0;
  double min_bound_slack = std::numeric_limits<double>::infinity();
  long long noise_samples = 0;
  double max_noise_ratio = 0.0;
};

struct RunRecord {
  Algorithm algorithm = Algorithm::md;
  RunConstants constants;
  std::vector<IterationRecord> records;
  /// Theorem bound at each kept record (NaN where the theorem has no explicit constant).
  std::vector<double> bound_curve;
  InvariantTally invariants;
  Vector final_x;
  /// The iterate the theorem bounds: running mean for md/omd/mp, weighted mean for smd, x_T for amd.
  Vector final_average;
  bool terminated_at_optimum = false;
  std::string rng_algorithm;
};

/// Reference optimum, (G, L), D^2 and the step size for a config. Throws
/// StepSizeError when an explicit eta exceeds the algorithm's cap.
RunConstants prepare_run(const RunConfig& cfg);

/// Step-size cap of the stated algorithm in units of 1/L (1, 1/3, 1/2); zero
/// for algorithms without a fixed cap.
double step_cap_fraction(Algorithm a);

/// The accelerated schedule's tau (clamped to >= 4) and base eta.
struct AcceleratedSchedule {
  long long tau;
  double eta;
};
AcceleratedSchedule accelerated_schedule(double D, double L, double G);

/// Adaptive SMD step for iteration t given the true gradient's dual norm a at
/// the previous iterate, sigma(a) and l(2a).
double smd_step_size(double grad_norm, double sigma_value, double link_value, double D, long long t);

/// Thinned checkpoint rule: every t <= 100, then t = ceil(1.1^k), and T itself.
std::vector<char> checkpoint_mask(long long T);

RunRecord run_md(const RunConfig& cfg);
RunRecord run_amd(const RunConfig& cfg);
RunRecord run_omd(const RunConfig& cfg);
RunRecord run_mp(const RunConfig& cfg);
RunRecord run_smd(const RunConfig& cfg);
RunRecord run(const RunConfig& cfg);

/// Gap used for rate slopes: the last iterate for md and amd, the average
/// iterate for omd, mp and smd.
double theorem_gap(Algorithm a, const IterationRecord& r);

}  // namespace gsmd
