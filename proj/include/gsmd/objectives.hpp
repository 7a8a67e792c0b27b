#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>

#include "gsmd/geometry.hpp"
#include "gsmd/smoothness.hpp"

namespace gsmd {

/// C exp(w'x + b)
struct LogisticKernel {
  Vector w;
  double b = 0.0;
  double C = 1.0;
};

/// C log(1 + exp(-w'x))
struct LogisticRegression {
  Vector w;
  double C = 1.0;
};

/// x' (1 - e1)(1 - e1)' x / 2
struct RankOneQuadratic {
  int n;
};

/// (sum x_i^2)^2 / 4 + prod x_i^2 + sum exp(5 x_i)
struct AppendixMix {
  int n;
};

/// |x|^2 / 2
struct HalfSquaredNorm {
  int n;
};

/// Smooth convex objective with analytic value, gradient, and Hessian-vector
/// oracles. Parameters are immutable; every oracle is a pure function.
class Objective {
 public:
  using Kind = std::variant<LogisticKernel, LogisticRegression, RankOneQuadratic, AppendixMix, HalfSquaredNorm>;

  explicit Objective(Kind kind);

  /// Preset ids: logistic_kernel, logistic_regression, rank_one_quadratic,
  /// appendix_mix, half_sq_norm.
  const std::string& id() const { return id_; }
  int dim() const { return dim_; }
  const Kind& kind() const { return kind_; }

  double value(const Vector& x) const;
  Vector gradient(const Vector& x) const;
  Vector hessian_apply(const Vector& x, const Vector& h) const;

  /// Link function proven for this objective under the given norm pair.
  /// Throws UnsupportedError for objectives whose link is only known empirically.
  LinkFunction analytic_link(NormPair pair) const;

  /// Infimum over all of R^n when it is known in closed form.
  std::optional<double> ambient_infimum() const;

  /// Closed-form minimum over a domain when one is known.
  std::optional<double> known_minimum(const Domain& domain) const;

 private:
  void require(const Vector& x) const;

  Kind kind_;
  int dim_;
  std::string id_;
};

using ParamTable = std::map<std::string, std::string>;

/// Build a preset from its id and a parameter table (n, w, w_seed, b, C).
Objective make_objective(const std::string& id, const ParamTable& params);

/// Minimum of f over a geometry's domain with a certified upper bound on
/// value - min (a Frank-Wolfe gap; zero for closed forms).
struct ReferenceOptimum {
  double value = 0.0;
  double gap = 0.0;
  Vector x;
  std::string method;
};

/// Known minimum when available; otherwise a prox-gradient reference solve
/// with backtracking. Throws ConvergenceError if the certified gap exceeds 1e-9.
ReferenceOptimum reference_fstar(const Objective& obj, const Geometry& geom);

/// Frank-Wolfe gap max_{u in domain} <grad f(x), x - u>, an upper bound on
/// f(x) - min f for convex f.
double frank_wolfe_gap(const Objective& obj, const Domain& domain, const Vector& x);

}  // namespace gsmd
