#include "gsmd/prox_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gsmd/error.hpp"
#include "gsmd/rng.hpp"

namespace gsmd {

namespace {

double entropy_prox_objective(const Vector& x, const Vector& y, const Vector& g) {
  double s = g.dot(x);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) s += x[i] * std::log(x[i] / y[i]);
  }
  return s;
}

Vector entropy_newton(const Vector& y, const Vector& g) {
  const Eigen::Index n = y.size();
  if (n == 1) return Vector::Ones(1);
  const Eigen::Index m = n - 1;
  Vector x = y;
  double fx = entropy_prox_objective(x, y, g);
  for (int iter = 0; iter < 500; ++iter) {
    Vector a(n);
    for (Eigen::Index i = 0; i < n; ++i) a[i] = g[i] + std::log(x[i] / y[i]);
    Vector grad(m);
    for (Eigen::Index i = 0; i < m; ++i) grad[i] = a[i] - a[m];
    if (grad.lpNorm<Eigen::Infinity>() < 1e-15) break;

    Eigen::MatrixXd hess = Eigen::MatrixXd::Constant(m, m, 1.0 / x[m]);
    for (Eigen::Index i = 0; i < m; ++i) hess(i, i) += 1.0 / x[i];
    const Vector step = -hess.ldlt().solve(grad);

    Vector full(n);
    full.head(m) = step;
    full[m] = -step.sum();
    double t = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (full[i] < 0.0) t = std::min(t, -0.99 * x[i] / full[i]);
    }
    const double slope = grad.dot(step);
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Vector cand = x + t * full;
      const double fc = entropy_prox_objective(cand, y, g);
      if (fc <= fx + 1e-4 * t * slope || fc <= fx) {
        moved = (cand - x).lpNorm<1>() > 0.0;
        x = cand;
        fx = fc;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return x / x.sum();
}

Vector ball_multiplier_bisection(const Geometry& geom, const Vector& y, const Vector& g) {
  const Vector& c = geom.domain().center();
  const double radius = geom.domain().radius();
  auto point = [&](double mu) -> Vector { return (y - g + mu * c) / (1.0 + mu); };
  if ((point(0.0) - c).norm() <= radius) return point(0.0);
  if (radius == 0.0) return c;
  double lo = 0.0;
  double hi = 1.0;
  while ((point(hi) - c).norm() > radius) {
    hi *= 2.0;
    if (hi > 1e300) throw ConvergenceError("numeric_prox: multiplier bracket failed");
  }
  for (int i = 0; i < 2000 && hi - lo > 1e-16 * std::max(1.0, hi); ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((point(mid) - c).norm() > radius) lo = mid;
    else hi = mid;
  }
  return point(hi);
}

}  // namespace

Vector numeric_prox(const Geometry& geom, const Vector& y, const Vector& g) {
  if (y.size() != geom.dim() || g.size() != geom.dim()) throw DomainError("numeric_prox: dimension mismatch");
  if (geom.psi_kind() == PsiKind::neg_entropy) {
    if (y.minCoeff() <= 0.0) throw DomainError("numeric_prox: y must be in the relative interior");
    return entropy_newton(y, g);
  }
  return ball_multiplier_bisection(geom, y, g);
}

Vector sample_domain_point(const Domain& domain, Rng& rng) {
  const int n = domain.dim();
  Vector x(n);
  if (domain.kind() == Domain::Kind::simplex) {
    for (int i = 0; i < n; ++i) x[i] = rng.exponential();
    return x / x.sum();
  }
  for (int i = 0; i < n; ++i) x[i] = rng.normal();
  const double nrm = x.norm();
  const double r = domain.radius() * std::pow(rng.uniform(), 1.0 / n);
  if (nrm == 0.0) return domain.center();
  return domain.center() + (r / nrm) * x;
}

namespace {

double prox_deviation(const Geometry& geom, std::uint64_t seed, int index, double scale) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
  Vector y = sample_domain_point(geom.domain(), rng);
  if (geom.psi_kind() == PsiKind::neg_entropy) {
    // Keep y away from the boundary so the reference Newton solve is well conditioned.
    y = (y + Vector::Constant(y.size(), 1e-3)) / (1.0 + 1e-3 * y.size());
  }
  Vector g(geom.dim());
  for (int i = 0; i < geom.dim(); ++i) g[i] = scale * rng.normal();
  const Vector closed = geom.prox_map(y, g);
  const Vector reference = numeric_prox(geom, y, g);
  return geom.primal_norm(closed - reference);
}

}  // namespace

ProxOracleReport compare_prox_to_oracle_serial(const Geometry& geom, int pairs, std::uint64_t seed,
                                               double scale) {
  ProxOracleReport report;
  report.pairs = pairs;
  for (int k = 0; k < pairs; ++k) {
    report.max_deviation = std::max(report.max_deviation, prox_deviation(geom, seed, k, scale));
  }
  return report;
}

ProxOracleReport compare_prox_to_oracle(const Geometry& geom, int pairs, std::uint64_t seed,
                                        double scale) {
  ProxOracleReport report;
  report.pairs = pairs;
  std::vector<double> dev(static_cast<std::size_t>(std::max(pairs, 0)));
#pragma omp parallel for schedule(static)
  for (int k = 0; k < pairs; ++k) dev[static_cast<std::size_t>(k)] = prox_deviation(geom, seed, k, scale);
  for (double d : dev) report.max_deviation = std::max(report.max_deviation, d);
  return report;
}

}  // namespace gsmd
