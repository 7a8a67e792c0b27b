#include "gsmd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gsmd/error.hpp"

namespace gsmd {

namespace {

// Per-coordinate floor applied before renormalizing an entropy prox step.
constexpr double kEntropyFloor = 1e-300;

bool all_finite(const Vector& v) { return v.allFinite(); }

}  // namespace

std::string to_string(NormPair pair) {
  return pair == NormPair::euclidean ? "euclidean" : "one_infinity";
}

NormPair norm_pair_from_string(const std::string& name) {
  if (name == "euclidean") return NormPair::euclidean;
  if (name == "one_infinity") return NormPair::one_infinity;
  throw DomainError("unknown norm pair '" + name + "'");
}

double primal_norm(NormPair pair, const Vector& x) {
  return pair == NormPair::euclidean ? x.norm() : x.lpNorm<1>();
}

double dual_norm(NormPair pair, const Vector& g) {
  if (pair == NormPair::euclidean) return g.norm();
  return g.size() == 0 ? 0.0 : g.lpNorm<Eigen::Infinity>();
}

Domain Domain::simplex(int n) {
  if (n < 1) throw DomainError("simplex dimension must be >= 1");
  return Domain(Kind::simplex, n, 0.0, Vector::Zero(n));
}

Domain Domain::ball(Vector center, double radius) {
  if (center.size() < 1) throw DomainError("ball dimension must be >= 1");
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw DomainError("ball radius must be finite and >= 0");
  if (!all_finite(center)) throw DomainError("ball center must be finite");
  const int n = static_cast<int>(center.size());
  return Domain(Kind::ball, n, radius, std::move(center));
}

bool Domain::contains(const Vector& x, double tol) const {
  if (x.size() != dim_ || !all_finite(x)) return false;
  if (kind_ == Kind::simplex) {
    if (x.minCoeff() < -tol) return false;
    return std::abs(x.sum() - 1.0) <= tol * std::max(1, dim_);
  }
  return (x - center_).norm() <= radius_ + tol;
}

Geometry Geometry::entropy_simplex(int n) {
  return Geometry(NormPair::one_infinity, PsiKind::neg_entropy, Domain::simplex(n));
}

Geometry Geometry::euclidean_ball(Vector center, double radius) {
  return Geometry(NormPair::euclidean, PsiKind::half_sq_euclidean,
                  Domain::ball(std::move(center), radius));
}

std::string Geometry::id() const {
  return psi_ == PsiKind::neg_entropy ? "entropy_simplex" : "euclidean_ball";
}

void Geometry::require_dim(const Vector& v, const char* what) const {
  if (v.size() != dim()) {
    throw DomainError(std::string(what) + " has dimension " + std::to_string(v.size()) +
                      ", geometry has " + std::to_string(dim()));
  }
}

double Geometry::psi(const Vector& x) const {
  require_dim(x, "point");
  if (psi_ == PsiKind::half_sq_euclidean) return 0.5 * (x - domain_.center()).squaredNorm();
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0) s += x[i] * std::log(x[i]);
  }
  return s;
}

double Geometry::bregman(const Vector& x, const Vector& y) const {
  require_dim(x, "x");
  require_dim(y, "y");
  if (!domain_.contains(x)) throw DomainError("bregman: x outside the domain");
  if (!domain_.contains(y)) throw DomainError("bregman: y outside the domain");
  if (psi_ == PsiKind::half_sq_euclidean) return 0.5 * (x - y).squaredNorm();

  // KL(x || y) on the simplex; the linear terms of the general entropy
  // divergence cancel because both points sum to one.
  double kl = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) throw DomainError("bregman: y has a zero coordinate under negative entropy");
    if (x[i] > 0.0) kl += x[i] * std::log(x[i] / y[i]);
  }
  kl += y.sum() - x.sum();
  return std::max(kl, 0.0);
}

Vector Geometry::prox_map(const Vector& y, const Vector& g) const {
  require_dim(y, "y");
  require_dim(g, "g");
  if (!all_finite(g)) throw DomainError("prox_map: gradient has non-finite entries");
  if (!all_finite(y)) throw DomainError("prox_map: y has non-finite entries");

  if (psi_ == PsiKind::half_sq_euclidean) {
    Vector z = y - g;
    const Vector offset = z - domain_.center();
    const double dist = offset.norm();
    if (dist > domain_.radius()) {
      if (domain_.radius() == 0.0) return domain_.center();
      z = domain_.center() + (domain_.radius() / dist) * offset;
    }
    return z;
  }

  // x_i proportional to y_i exp(-g_i), shifted by the max exponent.
  const Eigen::Index n = y.size();
  Vector expo(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    expo[i] = y[i] > 0.0 ? std::log(y[i]) - g[i] : -std::numeric_limits<double>::infinity();
  }
  const double shift = expo.maxCoeff();
  if (!std::isfinite(shift)) throw NumericalError("prox_map: all prox weights vanish");
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = std::max(std::exp(expo[i] - shift), kEntropyFloor);
  const double z = x.sum();
  if (!(z > 0.0) || !std::isfinite(z)) throw NumericalError("prox_map: renormalization constant underflowed");
  return x / z;
}

double Geometry::diameter_sq() const {
  if (psi_ == PsiKind::neg_entropy) return std::log(static_cast<double>(dim()));
  return 0.5 * domain_.radius() * domain_.radius();
}

Vector Geometry::argmin_psi() const {
  if (psi_ == PsiKind::neg_entropy) return Vector::Constant(dim(), 1.0 / dim());
  return domain_.center();
}

}  // namespace gsmd
