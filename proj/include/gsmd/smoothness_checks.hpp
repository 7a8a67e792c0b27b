#pragma once

#include <cstdint>
#include <vector>

#include "gsmd/geometry.hpp"
#include "gsmd/objectives.hpp"
#include "gsmd/smoothness.hpp"

namespace gsmd {

struct SelfBoundingReport {
  /// 2 l(2 |grad f(x)|_*) (f(x) - fstar) - |grad f(x)|_*^2, one per point.
  std::vector<double> margins;
  /// Indices with margin below -1e-9 (1 + |f(x)|).
  std::vector<std::size_t> violations;
  /// min over points of margin / (1 + |f(x)|).
  double worst_relative_margin = 0.0;
};

/// Evaluates the self-bounding inequality at each point. fstar must be a
/// lower bound of f that the inequality is stated against; for constrained
/// domains this is the ambient infimum, not the constrained minimum.
SelfBoundingReport check_self_bounding(const Objective& obj, NormPair pair, const LinkFunction& link,
                                       const std::vector<Vector>& points, double fstar);

struct LocalSmoothReport {
  int pairs_checked = 0;
  int lipschitz_violations = 0;
  int quadratic_violations = 0;
  double radius = 0.0;  ///< G / L with L = l(2G)
  double L = 0.0;
  double max_lipschitz_ratio = 0.0;  ///< max |grad f(x1) - grad f(x2)|_* / (L |x1 - x2|)
  double min_quadratic_slack = 0.0;
  /// Fraction of sampled points whose intended radius fit inside the domain
  /// without shrinking toward x.
  double coverage = 1.0;

  int violations() const { return lipschitz_violations + quadratic_violations; }
};

/// Samples pairs in the primal-norm ball B(x, G/L) intersected with the domain
/// and checks gradient Lipschitzness and the quadratic upper bound with L = l(2G).
LocalSmoothReport check_local_smooth(const Objective& obj, const Geometry& geom, const LinkFunction& link,
                                     const Vector& x, double G, int trials, std::uint64_t seed);

/// Verifies both inequalities for one explicit pair (x1, x2) with constant L.
/// Returns {lipschitz slack, quadratic slack}; both >= 0 when the pair passes.
std::pair<double, double> local_smooth_slack(const Objective& obj, NormPair pair, double L,
                                             const Vector& x1, const Vector& x2);

}  // namespace gsmd
