#include "gsmd/optimizers.hpp"

#include <algorithm>
#include <cmath>

#include "gsmd/error.hpp"
#include "gsmd/params.hpp"
#include "gsmd/rng.hpp"

namespace gsmd {

namespace {

constexpr double kBoundTol = 1e-9;
constexpr double kDescentRelTol = 1e-12;
constexpr double kNoiseRelTol = 1e-12;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

// Shared bookkeeping: thinned checkpoints, the bound curve and the invariant tally.
class Trace {
 public:
  Trace(const RunConfig& cfg, RunConstants constants)
      : cfg_(cfg), mask_(cfg.record_every_step ? std::vector<char>{} : checkpoint_mask(cfg.T)) {
    rec_.algorithm = cfg.algorithm;
    rec_.constants = std::move(constants);
    rec_.rng_algorithm = kRngAlgorithm;
  }

  const RunConstants& k() const { return rec_.constants; }
  InvariantTally& tally() { return rec_.invariants; }

  void keep(const IterationRecord& r, double bound) {
    ++rec_.invariants.steps;
    if (!mask_.empty() && !mask_[static_cast<std::size_t>(r.t)]) return;
    rec_.records.push_back(r);
    rec_.bound_curve.push_back(bound);
  }

  void grad_bound(double norm, double limit) {
    auto& t = rec_.invariants;
    if (limit > 0.0) t.max_grad_ratio = std::max(t.max_grad_ratio, norm / limit);
    if (norm > limit + kBoundTol) ++t.grad_bound_violations;
  }

  void aux_grad_bound(double norm, double limit) {
    auto& t = rec_.invariants;
    if (limit > 0.0) t.max_aux_grad_ratio = std::max(t.max_aux_grad_ratio, norm / limit);
    if (norm > limit + kBoundTol) ++t.aux_grad_violations;
  }

  void descent(double f_new, double f_old) {
    auto& t = rec_.invariants;
    t.max_descent_increase = std::max(t.max_descent_increase, f_new - f_old);
    if (f_new > f_old + kDescentRelTol * (1.0 + std::abs(f_old))) ++t.descent_violations;
  }

  void theorem_bound(double gap, double bound) {
    auto& t = rec_.invariants;
    t.min_bound_slack = std::min(t.min_bound_slack, bound - gap);
    if (gap > bound + kBoundTol + k().fstar_gap) ++t.bound_violations;
  }

  RunRecord finish(Vector final_x, Vector final_average) {
    rec_.final_x = std::move(final_x);
    rec_.final_average = std::move(final_average);
    return std::move(rec_);
  }

  RunRecord at_optimum(const Vector& x0) {
    rec_.terminated_at_optimum = true;
    return finish(x0, x0);
  }

 private:
  const RunConfig& cfg_;
  std::vector<char> mask_;
  RunRecord rec_;
};

void require_algorithm(const RunConfig& cfg, Algorithm a) {
  if (cfg.algorithm != a) throw ValidationError("run config is for " + to_string(cfg.algorithm) + ", not " + to_string(a));
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::md: return "md";
    case Algorithm::amd: return "amd";
    case Algorithm::omd: return "omd";
    case Algorithm::mp: return "mp";
    case Algorithm::smd: return "smd";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "md") return Algorithm::md;
  if (name == "amd") return Algorithm::amd;
  if (name == "omd") return Algorithm::omd;
  if (name == "mp") return Algorithm::mp;
  if (name == "smd") return Algorithm::smd;
  throw ValidationError("unknown algorithm '" + name + "'");
}

double step_cap_fraction(Algorithm a) {
  switch (a) {
    case Algorithm::md: return 1.0;
    case Algorithm::omd: return 1.0 / 3.0;
    case Algorithm::mp: return 0.5;
    default: return 0.0;
  }
}

AcceleratedSchedule accelerated_schedule(double D, double L, double G) {
  if (!(G > 0.0)) throw DomainError("accelerated schedule needs G > 0");
  const double raw = std::ceil(4.0 * std::sqrt(2.0) * D * L / G);
  const long long tau = std::max(4LL, static_cast<long long>(raw));
  const double t = static_cast<double>(tau);
  double eta = 1.0;
  if (tau > 3) eta = std::min(1.0, 3.0 * (t - 1.0) / (2.0 * (t - 3.0) * (t - 2.0)));
  return {tau, eta};
}

double smd_step_size(double grad_norm, double sigma_value, double link_value, double D, long long t) {
  const double ratio = sigma_value > 0.0 ? grad_norm / sigma_value : std::numeric_limits<double>::infinity();
  const double curvature_cap = std::min(1.0, ratio) / (2.0 * link_value);
  const double noise_cap = sigma_value > 0.0 ? D / (sigma_value * std::sqrt(static_cast<double>(t)))
                                             : std::numeric_limits<double>::infinity();
  return std::min(curvature_cap, noise_cap);
}

std::vector<char> checkpoint_mask(long long T) {
  std::vector<char> mask(static_cast<std::size_t>(std::max(T, 0LL) + 1), 0);
  for (long long t = 1; t <= std::min(T, 100LL); ++t) mask[static_cast<std::size_t>(t)] = 1;
  double p = 1.0;
  while (true) {
    const long long t = static_cast<long long>(std::ceil(p - 1e-9));
    if (t > T) break;
    mask[static_cast<std::size_t>(t)] = 1;
    p *= 1.1;
  }
  if (T >= 1) mask[static_cast<std::size_t>(T)] = 1;
  return mask;
}

RunConstants prepare_run(const RunConfig& cfg) {
  if (cfg.T < 1) throw ValidationError("T must be >= 1");
  if (cfg.objective.dim() != cfg.geometry.dim()) throw ValidationError("objective and geometry dimensions differ");
  RunConstants k;
  const ReferenceOptimum ref = cfg.fstar ? *cfg.fstar : reference_fstar(cfg.objective, cfg.geometry);
  k.fstar = ref.value;
  k.fstar_gap = ref.gap;
  k.fstar_method = ref.method;
  const Vector x0 = cfg.geometry.argmin_psi();
  k.F = std::max(0.0, cfg.objective.value(x0) - k.fstar);
  k.factor = cfg.algorithm == Algorithm::amd ? 4.0 : 2.0;
  const EffectiveSmoothness es = solve_G(cfg.link, k.F, k.factor);
  k.G = es.G;
  k.L = es.L;
  k.D_sq = cfg.geometry.diameter_sq();

  switch (cfg.algorithm) {
    case Algorithm::md:
    case Algorithm::omd:
    case Algorithm::mp: {
      const double cap = step_cap_fraction(cfg.algorithm) / k.L;
      if (cfg.eta) {
        if (!(*cfg.eta > 0.0)) throw StepSizeError("eta must be positive");
        if (*cfg.eta > cap * (1.0 + 1e-12)) {
          const char* rule = cfg.algorithm == Algorithm::md ? "1/L" : cfg.algorithm == Algorithm::omd ? "1/(3L)" : "1/(2L)";
          throw StepSizeError("eta " + format_double(*cfg.eta) + " exceeds the " + rule + " cap " + format_double(cap) +
                              " for " + to_string(cfg.algorithm));
        }
        k.eta = *cfg.eta;
      } else {
        k.eta = cap;
      }
      break;
    }
    case Algorithm::amd: {
      if (k.G > 0.0) {
        const AcceleratedSchedule s = accelerated_schedule(std::sqrt(k.D_sq), k.L, k.G);
        k.tau = s.tau;
        k.eta = s.eta;
        if (cfg.eta) {
          if (!(*cfg.eta > 0.0)) throw StepSizeError("eta must be positive");
          if (*cfg.eta > s.eta * (1.0 + 1e-12))
            throw StepSizeError("eta " + format_double(*cfg.eta) + " exceeds the accelerated schedule's eta " +
                                format_double(s.eta));
          k.eta = *cfg.eta;
        }
      }
      break;
    }
    case Algorithm::smd:
      if (cfg.eta) throw StepSizeError("smd uses the adaptive step-size rule; an explicit eta is not accepted");
      if (!cfg.noise) throw ValidationError("smd requires a noise model");
      break;
  }
  return k;
}

RunRecord run_md(const RunConfig& cfg) {
  require_algorithm(cfg, Algorithm::md);
  Trace trace(cfg, prepare_run(cfg));
  const auto& k = trace.k();
  const Objective& f = cfg.objective;
  const Geometry& geom = cfg.geometry;
  Vector x = geom.argmin_psi();
  if (k.G == 0.0) return trace.at_optimum(x);

  double fx = f.value(x);
  Vector g = f.gradient(x);
  trace.grad_bound(geom.dual_norm(g), k.G);
  Vector sum = Vector::Zero(x.size());
  Vector avg = x;
  for (long long t = 1; t <= cfg.T; ++t) {
    const Vector next = geom.prox_map(x, k.eta * g);
    const double f_next = f.value(next);
    const Vector g_next = f.gradient(next);
    const double gn = geom.dual_norm(g_next);
    trace.descent(f_next, fx);
    trace.grad_bound(gn, k.G);

    sum += next;
    avg = sum / static_cast<double>(t);
    const double avg_gap = f.value(avg) - k.fstar;
    const double gap = f_next - k.fstar;
    const double bound = k.D_sq / (k.eta * t);
    trace.theorem_bound(gap, bound);
    trace.theorem_bound(avg_gap, bound);

    IterationRecord r;
    r.t = t;
    r.f_gap = gap;
    r.avg_gap = avg_gap;
    r.grad_dual_norm = gn;
    r.step = k.eta;
    r.move = geom.primal_norm(next - x);
    trace.keep(r, bound);

    x = next;
    fx = f_next;
    g = g_next;
  }
  return trace.finish(x, avg);
}

RunRecord run_amd(const RunConfig& cfg) {
  require_algorithm(cfg, Algorithm::amd);
  Trace trace(cfg, prepare_run(cfg));
  const auto& k = trace.k();
  const Objective& f = cfg.objective;
  const Geometry& geom = cfg.geometry;
  Vector x = geom.argmin_psi();
  if (k.G == 0.0) return trace.at_optimum(x);
  Vector z = x;
  const double radius = k.G / k.L;

  trace.grad_bound(2.0 * geom.dual_norm(f.gradient(x)), 2.0 * k.G);
  for (long long t = 1; t <= cfg.T; ++t) {
    const double td = static_cast<double>(t);
    const double alpha = 2.0 / (td + 1.0);
    const Vector y = (1.0 - alpha) * x + alpha * z;
    const double e = geom.primal_norm(y - x);
    const Vector gy = f.gradient(y);
    const double step = td * k.eta / (2.0 * k.L);
    z = geom.prox_map(z, step * gy);
    const Vector next = (1.0 - alpha) * x + alpha * z;

    auto& tally = trace.tally();
    tally.max_e_ratio = std::max(tally.max_e_ratio, e / radius);
    if (e > radius + kBoundTol) ++tally.e_seq_violations;
    const double gyn = geom.dual_norm(gy);
    trace.aux_grad_bound(gyn, 2.0 * k.G);
    const double gxn = geom.dual_norm(f.gradient(next));
    trace.grad_bound(2.0 * gxn, 2.0 * k.G);

    const double gap = f.value(next) - k.fstar;
    const double bound = k.D_sq * k.L / (k.eta * td * (td + 1.0));
    trace.theorem_bound(gap, bound);

    IterationRecord r;
    r.t = t;
    r.f_gap = gap;
    r.grad_dual_norm = gxn;
    r.aux_grad_dual_norm = gyn;
    r.step = step;
    r.move = geom.primal_norm(next - x);
    r.e_t = e;
    trace.keep(r, bound);
    x = next;
  }
  return trace.finish(x, x);
}

RunRecord run_omd(const RunConfig& cfg) {
  require_algorithm(cfg, Algorithm::omd);
  Trace trace(cfg, prepare_run(cfg));
  const auto& k = trace.k();
  const Objective& f = cfg.objective;
  const Geometry& geom = cfg.geometry;
  Vector x = geom.argmin_psi();
  if (k.G == 0.0) return trace.at_optimum(x);
  Vector y_prev = x;
  Vector g_prev = f.gradient(y_prev);
  trace.grad_bound(geom.dual_norm(g_prev), k.G);
  const double gamma = k.eta * k.L;
  double geometric = 0.0;
  double gamma_pow = 1.0;
  Vector sum = Vector::Zero(x.size());
  Vector avg = x;
  for (long long t = 1; t <= cfg.T; ++t) {
    const Vector y = geom.prox_map(x, k.eta * g_prev);
    const Vector gy = f.gradient(y);
    const Vector next = geom.prox_map(x, k.eta * gy);

    gamma_pow *= gamma;
    geometric += gamma_pow;
    const double stability_bound = k.G / k.L * geometric;
    const double drift = geom.primal_norm(y - y_prev);
    auto& tally = trace.tally();
    if (stability_bound > 0.0) tally.max_stability_ratio = std::max(tally.max_stability_ratio, drift / stability_bound);
    if (drift > stability_bound + kBoundTol) ++tally.stability_violations;

    const double gyn = geom.dual_norm(gy);
    trace.aux_grad_bound(gyn, k.G);
    const double gxn = geom.dual_norm(f.gradient(next));
    trace.grad_bound(gxn, k.G);

    sum += y;
    avg = sum / static_cast<double>(t);
    const double avg_gap = f.value(avg) - k.fstar;
    const double bound = k.D_sq / (k.eta * t);
    trace.theorem_bound(avg_gap, bound);

    IterationRecord r;
    r.t = t;
    r.f_gap = f.value(next) - k.fstar;
    r.avg_gap = avg_gap;
    r.grad_dual_norm = gxn;
    r.aux_grad_dual_norm = gyn;
    r.step = k.eta;
    r.move = geom.primal_norm(next - x);
    trace.keep(r, bound);

    x = next;
    y_prev = y;
    g_prev = gy;
  }
  return trace.finish(x, avg);
}

RunRecord run_mp(const RunConfig& cfg) {
  require_algorithm(cfg, Algorithm::mp);
  Trace trace(cfg, prepare_run(cfg));
  const auto& k = trace.k();
  const Objective& f = cfg.objective;
  const Geometry& geom = cfg.geometry;
  Vector x = geom.argmin_psi();
  if (k.G == 0.0) return trace.at_optimum(x);
  double fx = f.value(x);
  Vector gx = f.gradient(x);
  trace.grad_bound(geom.dual_norm(gx), k.G);
  Vector sum = Vector::Zero(x.size());
  Vector avg = x;
  for (long long t = 1; t <= cfg.T; ++t) {
    const Vector y = geom.prox_map(x, k.eta * gx);
    const Vector gy = f.gradient(y);
    const Vector next = geom.prox_map(x, k.eta * gy);
    const double fy = f.value(y);
    const double f_next = f.value(next);
    trace.descent(std::max(fy, f_next), fx);

    const Vector g_next = f.gradient(next);
    const double gyn = geom.dual_norm(gy);
    const double gxn = geom.dual_norm(g_next);
    trace.aux_grad_bound(gyn, k.G);
    trace.grad_bound(gxn, k.G);

    sum += y;
    avg = sum / static_cast<double>(t);
    const double avg_gap = f.value(avg) - k.fstar;
    const double bound = k.D_sq / (k.eta * t);
    trace.theorem_bound(avg_gap, bound);

    IterationRecord r;
    r.t = t;
    r.f_gap = f_next - k.fstar;
    r.avg_gap = avg_gap;
    r.grad_dual_norm = gxn;
    r.aux_grad_dual_norm = gyn;
    r.step = k.eta;
    r.move = geom.primal_norm(next - x);
    trace.keep(r, bound);

    x = next;
    fx = f_next;
    gx = g_next;
  }
  return trace.finish(x, avg);
}

RunRecord run_smd(const RunConfig& cfg) {
  require_algorithm(cfg, Algorithm::smd);
  Trace trace(cfg, prepare_run(cfg));
  const auto& k = trace.k();
  const Objective& f = cfg.objective;
  const Geometry& geom = cfg.geometry;
  const NoiseModel& noise = *cfg.noise;
  const double D = std::sqrt(k.D_sq);
  Rng rng(derive_seed(cfg.seed, 0));

  Vector x = geom.argmin_psi();
  Vector g = f.gradient(x);
  double gn = geom.dual_norm(g);
  if (k.G > 0.0) trace.grad_bound(gn, k.G);
  double weight = 0.0;
  Vector weighted = Vector::Zero(x.size());
  Vector avg = x;
  for (long long t = 1; t <= cfg.T; ++t) {
    const double sigma = noise.sigma(gn);
    const double step = smd_step_size(gn, sigma, cfg.link(2.0 * gn), D, t);
    const Vector eps = noise.sample(g, geom.norm_pair(), rng);
    const double eps_norm = geom.dual_norm(eps);
    auto& tally = trace.tally();
    ++tally.noise_samples;
    if (sigma > 0.0) tally.max_noise_ratio = std::max(tally.max_noise_ratio, eps_norm / sigma);
    if (eps_norm > sigma * (1.0 + kNoiseRelTol)) {
      throw NoiseError("noise sample dual norm " + format_double(eps_norm) + " exceeds sigma " + format_double(sigma));
    }
    const Vector next = geom.prox_map(x, step * (g + eps));

    weight += step;
    weighted += step * next;
    if (weight > 0.0) avg = weighted / weight;
    const Vector g_next = f.gradient(next);
    const double gn_next = geom.dual_norm(g_next);
    if (k.G > 0.0) trace.grad_bound(gn_next, k.G);

    IterationRecord r;
    r.t = t;
    r.f_gap = f.value(next) - k.fstar;
    r.avg_gap = f.value(avg) - k.fstar;
    r.grad_dual_norm = gn_next;
    r.step = step;
    r.move = geom.primal_norm(next - x);
    trace.keep(r, kNaN);

    x = next;
    g = g_next;
    gn = gn_next;
  }
  return trace.finish(x, avg);
}

RunRecord run(const RunConfig& cfg) {
  switch (cfg.algorithm) {
    case Algorithm::md: return run_md(cfg);
    case Algorithm::amd: return run_amd(cfg);
    case Algorithm::omd: return run_omd(cfg);
    case Algorithm::mp: return run_mp(cfg);
    case Algorithm::smd: return run_smd(cfg);
  }
  throw ValidationError("unknown algorithm");
}

double theorem_gap(Algorithm a, const IterationRecord& r) {
  if (a == Algorithm::md || a == Algorithm::amd || !r.avg_gap) return r.f_gap;
  return *r.avg_gap;
}

}  // namespace gsmd
