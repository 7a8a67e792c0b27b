#pragma once

#include <Eigen/Dense>
#include <string>

namespace gsmd {

using Vector = Eigen::VectorXd;

/// Primal/dual norm pair. `one_infinity` measures displacements with the
/// l1 norm and gradients with its dual, the l-infinity norm.
enum class NormPair { euclidean, one_infinity };

std::string to_string(NormPair pair);
NormPair norm_pair_from_string(const std::string& name);

double primal_norm(NormPair pair, const Vector& x);
double dual_norm(NormPair pair, const Vector& g);

/// Probability simplex of dimension n, or a closed Euclidean ball.
class Domain {
 public:
  enum class Kind { simplex, ball };

  static Domain simplex(int n);
  static Domain ball(Vector center, double radius);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double radius() const { return radius_; }
  const Vector& center() const { return center_; }

  bool contains(const Vector& x, double tol = 1e-12) const;

 private:
  Domain(Kind kind, int dim, double radius, Vector center)
      : kind_(kind), dim_(dim), radius_(radius), center_(std::move(center)) {}

  Kind kind_;
  int dim_;
  double radius_;
  Vector center_;
};

enum class PsiKind { half_sq_euclidean, neg_entropy };

/// A mirror-descent geometry: a domain, the norm pair measuring it, and a
/// 1-strongly convex distance-generating function psi.
///
/// Only the two standard pairings are constructible: negative entropy on the
/// simplex with (l1, l-inf), and psi(x) = |x - center|^2 / 2 on a ball with the
/// Euclidean norm. Values are immutable and cheap to copy.
class Geometry {
 public:
  static Geometry entropy_simplex(int n);
  static Geometry euclidean_ball(Vector center, double radius);

  NormPair norm_pair() const { return pair_; }
  PsiKind psi_kind() const { return psi_; }
  const Domain& domain() const { return domain_; }
  int dim() const { return domain_.dim(); }
  std::string id() const;

  double primal_norm(const Vector& x) const { return gsmd::primal_norm(pair_, x); }
  double dual_norm(const Vector& g) const { return gsmd::dual_norm(pair_, g); }

  /// psi(x), with 0 ln 0 := 0 for the entropy.
  double psi(const Vector& x) const;

  /// B(x, y) = psi(x) - psi(y) - <grad psi(y), x - y>. Throws DomainError if x
  /// is outside the domain or y is not in its relative interior.
  double bregman(const Vector& x, const Vector& y) const;

  /// argmin over the domain of <g, x> + B(x, y).
  Vector prox_map(const Vector& y, const Vector& g) const;

  /// D^2 with max psi - min psi <= D^2 over the domain.
  double diameter_sq() const;

  /// Minimizer of psi over the domain; the starting point of every optimizer.
  Vector argmin_psi() const;

 private:
  Geometry(NormPair pair, PsiKind psi, Domain domain)
      : pair_(pair), psi_(psi), domain_(std::move(domain)) {}

  void require_dim(const Vector& v, const char* what) const;

  NormPair pair_;
  PsiKind psi_;
  Domain domain_;
};

}  // namespace gsmd
