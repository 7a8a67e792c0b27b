#include "gsmd/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gsmd/error.hpp"
#include "gsmd/params.hpp"
#include "gsmd/rng.hpp"

namespace gsmd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Coordinates above this magnitude let the product term be evaluated in log space.
constexpr double kLogSpaceFloor = 1e-8;

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// 1 / (1 + exp(z)) without overflow.
double sigmoid_neg(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

double rank_one_projection(const Vector& x) { return x.size() <= 1 ? 0.0 : x.tail(x.size() - 1).sum(); }

Vector rank_one_direction(Eigen::Index n) {
  Vector u = Vector::Ones(n);
  u[0] = 0.0;
  return u;
}

bool log_space_ok(const Vector& x) { return x.cwiseAbs().minCoeff() > kLogSpaceFloor; }

double product_of_squares(const Vector& x) {
  if (log_space_ok(x)) return std::exp(2.0 * x.cwiseAbs().array().log().sum());
  double p = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) p *= x[i] * x[i];
  return p;
}

// d/dx_j prod x_i^2 = 2 x_j prod_{i != j} x_i^2
Vector product_gradient(const Vector& x) {
  const Eigen::Index n = x.size();
  Vector g(n);
  if (log_space_ok(x)) {
    const Vector logs = x.cwiseAbs().array().log();
    const double total = 2.0 * logs.sum();
    for (Eigen::Index j = 0; j < n; ++j) {
      g[j] = 2.0 * (x[j] > 0 ? 1.0 : -1.0) * std::exp(total - logs[j]);
    }
    return g;
  }
  // Prefix/suffix products of squares keep zero coordinates exact.
  Vector prefix(n + 1), suffix(n + 1);
  prefix[0] = 1.0;
  suffix[n] = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) prefix[i + 1] = prefix[i] * x[i] * x[i];
  for (Eigen::Index i = n; i > 0; --i) suffix[i - 1] = suffix[i] * x[i - 1] * x[i - 1];
  for (Eigen::Index j = 0; j < n; ++j) g[j] = 2.0 * x[j] * prefix[j] * suffix[j + 1];
  return g;
}

Vector product_hessian_apply(const Vector& x, const Vector& h) {
  const Eigen::Index n = x.size();
  Vector out = Vector::Zero(n);
  if (n == 0) return out;
  if (log_space_ok(x)) {
    const Vector logs = x.cwiseAbs().array().log();
    const double total = 2.0 * logs.sum();
    Vector q(n);
    for (Eigen::Index k = 0; k < n; ++k) q[k] = h[k] / x[k];
    const double s = q.sum();
    for (Eigen::Index j = 0; j < n; ++j) {
      const double sgn = x[j] > 0 ? 1.0 : -1.0;
      out[j] = 2.0 * std::exp(total - 2.0 * logs[j]) * h[j] + 4.0 * sgn * std::exp(total - logs[j]) * (s - q[j]);
    }
    return out;
  }
  // Direct products; only reached near the boundary of the orthant.
  for (Eigen::Index j = 0; j < n; ++j) {
    double diag = 1.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != j) diag *= x[i] * x[i];
    out[j] += 2.0 * diag * h[j];
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == j || h[k] == 0.0) continue;
      double rest = 1.0;
      for (Eigen::Index i = 0; i < n; ++i)
        if (i != j && i != k) rest *= x[i] * x[i];
      out[j] += 4.0 * x[j] * x[k] * rest * h[k];
    }
  }
  return out;
}

int dim_of(const Objective::Kind& kind) {
  return std::visit(overloaded{
                        [](const LogisticKernel& k) { return static_cast<int>(k.w.size()); },
                        [](const LogisticRegression& k) { return static_cast<int>(k.w.size()); },
                        [](const RankOneQuadratic& k) { return k.n; },
                        [](const AppendixMix& k) { return k.n; },
                        [](const HalfSquaredNorm& k) { return k.n; },
                    },
                    kind);
}

std::string id_of(const Objective::Kind& kind) {
  return std::visit(overloaded{
                        [](const LogisticKernel&) { return std::string("logistic_kernel"); },
                        [](const LogisticRegression&) { return std::string("logistic_regression"); },
                        [](const RankOneQuadratic&) { return std::string("rank_one_quadratic"); },
                        [](const AppendixMix&) { return std::string("appendix_mix"); },
                        [](const HalfSquaredNorm&) { return std::string("half_sq_norm"); },
                    },
                    kind);
}

}  // namespace

Objective::Objective(Kind kind) : kind_(std::move(kind)), dim_(dim_of(kind_)), id_(id_of(kind_)) {
  if (dim_ < 1) throw DomainError("objective dimension must be >= 1");
  std::visit(overloaded{
                 [](const LogisticKernel& k) {
                   if (!k.w.allFinite() || !std::isfinite(k.b) || !std::isfinite(k.C) || k.C == 0.0)
                     throw DomainError("logistic_kernel needs finite w, b and C != 0");
                 },
                 [](const LogisticRegression& k) {
                   if (!k.w.allFinite() || !std::isfinite(k.C) || k.C == 0.0)
                     throw DomainError("logistic_regression needs finite w and C != 0");
                 },
                 [](const auto&) {},
             },
             kind_);
}

void Objective::require(const Vector& x) const {
  if (x.size() != dim_) {
    throw DomainError(id_ + ": point has dimension " + std::to_string(x.size()) + ", expected " +
                      std::to_string(dim_));
  }
  if (!x.allFinite()) throw DomainError(id_ + ": point has non-finite entries");
}

double Objective::value(const Vector& x) const {
  require(x);
  return std::visit(overloaded{
                        [&](const LogisticKernel& k) { return k.C * std::exp(k.w.dot(x) + k.b); },
                        [&](const LogisticRegression& k) { return k.C * softplus(-k.w.dot(x)); },
                        [&](const RankOneQuadratic&) {
                          const double s = rank_one_projection(x);
                          return 0.5 * s * s;
                        },
                        [&](const AppendixMix&) {
                          const double sq = x.squaredNorm();
                          return 0.25 * sq * sq + product_of_squares(x) + (5.0 * x).array().exp().sum();
                        },
                        [&](const HalfSquaredNorm&) { return 0.5 * x.squaredNorm(); },
                    },
                    kind_);
}

Vector Objective::gradient(const Vector& x) const {
  require(x);
  return std::visit(overloaded{
                        [&](const LogisticKernel& k) -> Vector { return (k.C * std::exp(k.w.dot(x) + k.b)) * k.w; },
                        [&](const LogisticRegression& k) -> Vector { return (-k.C * sigmoid_neg(k.w.dot(x))) * k.w; },
                        [&](const RankOneQuadratic&) -> Vector {
                          return rank_one_projection(x) * rank_one_direction(x.size());
                        },
                        [&](const AppendixMix&) -> Vector {
                          Vector g = x.squaredNorm() * x;
                          g += product_gradient(x);
                          g += (5.0 * (5.0 * x).array().exp()).matrix();
                          return g;
                        },
                        [&](const HalfSquaredNorm&) -> Vector { return x; },
                    },
                    kind_);
}

Vector Objective::hessian_apply(const Vector& x, const Vector& h) const {
  require(x);
  if (h.size() != dim_) throw DomainError(id_ + ": direction has wrong dimension");
  return std::visit(overloaded{
                        [&](const LogisticKernel& k) -> Vector {
                          return (k.C * std::exp(k.w.dot(x) + k.b) * k.w.dot(h)) * k.w;
                        },
                        [&](const LogisticRegression& k) -> Vector {
                          const double u = k.w.dot(x);
                          // sigma(u) sigma(-u)
                          const double curv = sigmoid_neg(u) * sigmoid_neg(-u);
                          return (k.C * curv * k.w.dot(h)) * k.w;
                        },
                        [&](const RankOneQuadratic&) -> Vector {
                          return rank_one_projection(h) * rank_one_direction(x.size());
                        },
                        [&](const AppendixMix&) -> Vector {
                          Vector out = x.squaredNorm() * h + (2.0 * x.dot(h)) * x;
                          out += (25.0 * (5.0 * x).array().exp() * h.array()).matrix();
                          out += product_hessian_apply(x, h);
                          return out;
                        },
                        [&](const HalfSquaredNorm&) -> Vector { return h; },
                    },
                    kind_);
}

LinkFunction Objective::analytic_link(NormPair pair) const {
  return std::visit(
      overloaded{
          [&](const LogisticKernel& k) {
            return LinkFunction::affine(kLinkFloor, dual_norm(pair, k.w));
          },
          [&](const LogisticRegression& k) {
            return LinkFunction::affine(kLinkFloor, dual_norm(pair, k.w));
          },
          [&](const RankOneQuadratic& k) {
            if (k.n == 1) return LinkFunction::constant(kLinkFloor);
            return LinkFunction::constant(pair == NormPair::euclidean ? k.n - 1.0 : 1.0);
          },
          [&](const AppendixMix&) -> LinkFunction {
            throw UnsupportedError("appendix_mix has no analytic link; estimate it with the profiler");
          },
          [&](const HalfSquaredNorm&) { return LinkFunction::constant(1.0); },
      },
      kind_);
}

std::optional<double> Objective::ambient_infimum() const {
  return std::visit(overloaded{
                        [](const LogisticKernel& k) -> std::optional<double> {
                          if (k.C < 0.0) return std::nullopt;
                          return k.w.isZero(0.0) ? k.C * std::exp(k.b) : 0.0;
                        },
                        [](const LogisticRegression& k) -> std::optional<double> {
                          if (k.C < 0.0) return std::nullopt;
                          return k.w.isZero(0.0) ? k.C * std::log(2.0) : 0.0;
                        },
                        [](const RankOneQuadratic&) -> std::optional<double> { return 0.0; },
                        [](const AppendixMix&) -> std::optional<double> { return std::nullopt; },
                        [](const HalfSquaredNorm&) -> std::optional<double> { return 0.0; },
                    },
                    kind_);
}

std::optional<double> Objective::known_minimum(const Domain& domain) const {
  if (domain.dim() != dim_) throw DomainError("known_minimum: dimension mismatch");
  const bool simplex = domain.kind() == Domain::Kind::simplex;
  const Vector& c = domain.center();
  const double R = domain.radius();
  return std::visit(
      overloaded{
          [&](const LogisticKernel& k) -> std::optional<double> {
            if (k.C < 0.0) return std::nullopt;
            const double umin = simplex ? k.w.minCoeff() : k.w.dot(c) - R * k.w.norm();
            return k.C * std::exp(umin + k.b);
          },
          [&](const LogisticRegression& k) -> std::optional<double> {
            if (k.C < 0.0) return std::nullopt;
            const double umax = simplex ? k.w.maxCoeff() : k.w.dot(c) + R * k.w.norm();
            return k.C * softplus(-umax);
          },
          [&](const RankOneQuadratic& k) -> std::optional<double> {
            if (simplex) return 0.0;
            const double s = std::max(0.0, std::abs(rank_one_projection(c)) - R * std::sqrt(k.n - 1.0));
            return 0.5 * s * s;
          },
          [&](const AppendixMix&) -> std::optional<double> { return std::nullopt; },
          [&](const HalfSquaredNorm& k) -> std::optional<double> {
            if (simplex) return 0.5 / k.n;
            const double s = std::max(0.0, c.norm() - R);
            return 0.5 * s * s;
          },
      },
      kind_);
}

Objective make_objective(const std::string& id, const ParamTable& params) {
  auto allow = [&](std::initializer_list<const char*> keys) {
    for (const auto& [key, value] : params) {
      bool ok = false;
      for (const char* k : keys) ok = ok || key == k;
      if (!ok) throw ValidationError("objective '" + id + "' has no parameter '" + key + "'");
    }
  };
  auto get = [&](const char* key) -> const std::string* {
    auto it = params.find(key);
    return it == params.end() ? nullptr : &it->second;
  };
  auto dimension = [&]() -> int {
    const std::string* n = get("n");
    if (!n) throw ValidationError("objective '" + id + "' requires parameter n");
    const long long v = parse_int(*n, "objective.n");
    if (v < 1 || v > 100000) throw ValidationError("objective.n must be in [1, 100000]");
    return static_cast<int>(v);
  };
  auto weights = [&]() -> Vector {
    const std::string* w = get("w");
    const std::string* seed = get("w_seed");
    if (w && seed) throw ValidationError("objective '" + id + "': give either w or w_seed, not both");
    if (w) {
      const auto vals = parse_double_list(*w, "objective.w");
      if (vals.empty()) throw ValidationError("objective.w must not be empty");
      if (const std::string* n = get("n")) {
        if (parse_int(*n, "objective.n") != static_cast<long long>(vals.size()))
          throw ValidationError("objective.n does not match the length of objective.w");
      }
      return Eigen::Map<const Vector>(vals.data(), static_cast<Eigen::Index>(vals.size()));
    }
    if (!seed) throw ValidationError("objective '" + id + "' requires w or w_seed");
    const int n = dimension();
    Rng rng(parse_u64(*seed, "objective.w_seed"));
    Vector out(n);
    for (int i = 0; i < n; ++i) out[i] = rng.normal();
    return out;
  };
  auto number = [&](const char* key, double fallback) {
    const std::string* v = get(key);
    return v ? parse_double(*v, std::string("objective.") + key) : fallback;
  };

  if (id == "logistic_kernel") {
    allow({"n", "w", "w_seed", "b", "C"});
    return Objective(LogisticKernel{weights(), number("b", 0.0), number("C", 1.0)});
  }
  if (id == "logistic_regression") {
    allow({"n", "w", "w_seed", "C"});
    return Objective(LogisticRegression{weights(), number("C", 1.0)});
  }
  if (id == "rank_one_quadratic") {
    allow({"n"});
    return Objective(RankOneQuadratic{dimension()});
  }
  if (id == "appendix_mix") {
    allow({"n"});
    return Objective(AppendixMix{dimension()});
  }
  if (id == "half_sq_norm") {
    allow({"n"});
    return Objective(HalfSquaredNorm{dimension()});
  }
  throw ValidationError("unknown objective '" + id + "'");
}

double frank_wolfe_gap(const Objective& obj, const Domain& domain, const Vector& x) {
  const Vector g = obj.gradient(x);
  if (domain.kind() == Domain::Kind::simplex) return g.dot(x) - g.minCoeff();
  return g.dot(x - domain.center()) + domain.radius() * g.norm();
}

ReferenceOptimum reference_fstar(const Objective& obj, const Geometry& geom) {
  if (obj.dim() != geom.dim()) throw DomainError("reference_fstar: dimension mismatch");
  if (auto known = obj.known_minimum(geom.domain())) {
    ReferenceOptimum out;
    out.value = *known;
    out.gap = 0.0;
    out.method = "closed_form";
    return out;
  }

  constexpr int kMaxIterations = 1000000;
  constexpr double kTargetGap = 1e-13;
  Vector x = geom.argmin_psi();
  double fx = obj.value(x);
  double best = fx;
  Vector best_x = x;
  double lower = -std::numeric_limits<double>::infinity();
  double eta = 1.0;
  for (int it = 0; it < kMaxIterations; ++it) {
    const Vector g = obj.gradient(x);
    lower = std::max(lower, fx - frank_wolfe_gap(obj, geom.domain(), x));
    if (best - lower <= kTargetGap * std::max(1.0, std::abs(best))) break;

    bool accepted = false;
    for (int ls = 0; ls < 200; ++ls) {
      const Vector cand = geom.prox_map(x, eta * g);
      const Vector d = cand - x;
      const double fc = obj.value(cand);
      const double model = fx + g.dot(d) + 0.5 * geom.primal_norm(d) * geom.primal_norm(d) / eta;
      if (fc <= model + 1e-15 * std::max(1.0, std::abs(fx))) {
        x = cand;
        fx = fc;
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) break;
    if (fx < best) {
      best = fx;
      best_x = x;
    }
    eta *= 1.25;
  }
  lower = std::max(lower, fx - frank_wolfe_gap(obj, geom.domain(), x));

  ReferenceOptimum out;
  out.value = best;
  out.gap = std::max(0.0, best - lower);
  out.x = best_x;
  out.method = "prox_gradient";
  if (out.gap > 1e-9) {
    throw ConvergenceError("reference_fstar: certified gap " + format_double(out.gap) + " exceeds 1e-9");
  }
  return out;
}

}  // namespace gsmd
