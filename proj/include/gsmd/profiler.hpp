#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gsmd/geometry.hpp"
#include "gsmd/objectives.hpp"

namespace gsmd {

/// Induced Hessian norm at x: the spectral norm for the Euclidean pair, and
/// sup over the simplex of |H u|_inf (attained at a vertex) for one_infinity.
double induced_hess_norm(const Objective& obj, const Vector& x, NormPair pair);

/// Spectral norm of the (symmetric PSD) Hessian by power iteration from the
/// given start vector. Falls back to a dense eigensolve when the iteration
/// does not settle within 1000 steps.
double hessian_spectral_norm(const Objective& obj, const Vector& x, const Vector& start);

struct LinkSample {
  double grad_norm = 0.0;
  double hess_norm = 0.0;
  Vector x;
};

/// n_samples uniform simplex points of dimension obj.dim(); sample i uses the
/// stream derive_seed(seed, i), so the serial and parallel versions agree.
std::vector<LinkSample> sample_links(const Objective& obj, NormPair pair, int n_samples, std::uint64_t seed);
std::vector<LinkSample> sample_links_serial(const Objective& obj, NormPair pair, int n_samples,
                                            std::uint64_t seed);

struct AffineFit {
  double L0 = 0.0;
  double L1 = 0.0;
  double residual = 0.0;  ///< RMS
};

/// Least squares of hess_norm on grad_norm. A negative slope is clamped to 0
/// and the intercept refit as the mean. Hessian norms that agree to 1e-12
/// relative give the constant fit directly.
AffineFit fit_affine(const std::vector<LinkSample>& samples);

struct RatioFit {
  double a = 0.0;
  double b = 0.0;
  double residual = 0.0;  ///< RMS in log space
  std::vector<int> dims;
  std::vector<double> ratios;
};

/// Log-log least squares for ratio = a n^{-b}.
RatioFit fit_power_law(const std::vector<int>& dims, const std::vector<double>& ratios);

struct ProfileOptions {
  std::string objective = "appendix_mix";
  /// Extra preset parameters; n is filled in per dimension.
  ParamTable params;
  std::vector<int> dims;
  int samples = 500;
  std::uint64_t seed = 0;
  bool euclidean = true;
  bool one_infinity = true;
};

struct ProfileRow {
  int n = 0;
  std::optional<AffineFit> hat;    ///< Euclidean pair
  std::optional<AffineFit> tilde;  ///< (l1, l-inf) pair
  std::optional<double> ratio;     ///< tilde L1 / hat L1, or tilde L0 / hat L0 when both slopes are 0
};

struct ProfileResult {
  std::vector<ProfileRow> rows;
  std::optional<RatioFit> fit;  ///< present when both pairs were profiled
  std::string sampling = "uniform simplex (flat Dirichlet), seed derive_seed(derive_seed(seed, n), i)";
  std::string aggregation = "ratio of fitted slopes";
};

/// Profiles each dimension independently (in parallel) and fits the slope
/// ratio exponent when both pairs are requested.
ProfileResult profile(const ProfileOptions& opt);
ProfileResult profile_serial(const ProfileOptions& opt);

}  // namespace gsmd
