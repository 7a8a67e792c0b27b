#include "gsmd/smoothness_checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gsmd/error.hpp"
#include "gsmd/prox_oracle.hpp"
#include "gsmd/rng.hpp"

namespace gsmd {

namespace {
constexpr double kRelTol = 1e-8;
constexpr double kSelfBoundingTol = 1e-9;
}  // namespace

SelfBoundingReport check_self_bounding(const Objective& obj, NormPair pair, const LinkFunction& link,
                                       const std::vector<Vector>& points, double fstar) {
  SelfBoundingReport report;
  report.margins.reserve(points.size());
  report.worst_relative_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double f = obj.value(points[i]);
    const double gn = dual_norm(pair, obj.gradient(points[i]));
    const double margin = 2.0 * link(2.0 * gn) * (f - fstar) - gn * gn;
    report.margins.push_back(margin);
    const double scale = 1.0 + std::abs(f);
    report.worst_relative_margin = std::min(report.worst_relative_margin, margin / scale);
    if (margin < -kSelfBoundingTol * scale) report.violations.push_back(i);
  }
  if (points.empty()) report.worst_relative_margin = 0.0;
  return report;
}

std::pair<double, double> local_smooth_slack(const Objective& obj, NormPair pair, double L, const Vector& x1,
                                             const Vector& x2) {
  const Vector d = x1 - x2;
  const double dist = primal_norm(pair, d);
  const Vector g1 = obj.gradient(x1);
  const Vector g2 = obj.gradient(x2);
  const double lip_lhs = dual_norm(pair, g1 - g2);
  const double lip_rhs = L * dist;
  const double lip_slack = lip_rhs - lip_lhs + kRelTol * (lip_rhs + dual_norm(pair, g1) + dual_norm(pair, g2));

  const double f1 = obj.value(x1);
  const double f2 = obj.value(x2);
  const double quad_rhs = f2 + g2.dot(d) + 0.5 * L * dist * dist;
  const double quad_slack = quad_rhs - f1 + kRelTol * (std::abs(f1) + std::abs(f2) + 1e-300);
  return {lip_slack, quad_slack};
}

LocalSmoothReport check_local_smooth(const Objective& obj, const Geometry& geom, const LinkFunction& link,
                                     const Vector& x, double G, int trials, std::uint64_t seed) {
  if (!geom.domain().contains(x, 1e-10)) throw DomainError("check_local_smooth: x outside the domain");
  const double gx = geom.dual_norm(obj.gradient(x));
  if (gx > G * (1.0 + kRelTol) + 1e-12) {
    throw DomainError("check_local_smooth: gradient dual norm at x exceeds G");
  }
  LocalSmoothReport report;
  report.L = link(2.0 * G);
  report.radius = G / report.L;
  report.min_quadratic_slack = std::numeric_limits<double>::infinity();
  Rng rng(seed);
  int unclipped = 0;
  int drawn = 0;

  // A point is drawn by moving from x toward a uniform domain point by a
  // uniform fraction of the radius; convexity keeps it in the domain.
  auto draw = [&]() -> Vector {
    const Vector z = sample_domain_point(geom.domain(), rng);
    const Vector dir = z - x;
    const double len = geom.primal_norm(dir);
    ++drawn;
    if (len == 0.0) {
      ++unclipped;
      return x;
    }
    const double want = rng.uniform() * report.radius;
    if (want <= len) ++unclipped;
    return x + std::min(1.0, want / len) * dir;
  };

  for (int k = 0; k < trials; ++k) {
    const Vector x1 = draw();
    const Vector x2 = draw();
    const auto [lip, quad] = local_smooth_slack(obj, geom.norm_pair(), report.L, x1, x2);
    const double dist = geom.primal_norm(x1 - x2);
    if (dist > 0.0) {
      const double ratio = geom.dual_norm(obj.gradient(x1) - obj.gradient(x2)) / (report.L * dist);
      report.max_lipschitz_ratio = std::max(report.max_lipschitz_ratio, ratio);
    }
    report.min_quadratic_slack = std::min(report.min_quadratic_slack, quad);
    if (lip < 0.0) ++report.lipschitz_violations;
    if (quad < 0.0) ++report.quadratic_violations;
    ++report.pairs_checked;
  }
  if (report.pairs_checked == 0) report.min_quadratic_slack = 0.0;
  report.coverage = drawn == 0 ? 1.0 : static_cast<double>(unclipped) / drawn;
  return report;
}

}  // namespace gsmd
