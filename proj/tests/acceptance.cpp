// End-to-end acceptance report: one PASS/FAIL line per criterion.
// Exits with the number of failing criteria.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gsmd/harness.hpp"
#include "gsmd/noise.hpp"
#include "gsmd/optimizers.hpp"
#include "gsmd/params.hpp"
#include "gsmd/profiler.hpp"
#include "gsmd/prox_oracle.hpp"
#include "gsmd/rng.hpp"
#include "gsmd/smoothness.hpp"
#include "gsmd/smoothness_checks.hpp"
#include "gsmd/stats.hpp"

using namespace gsmd;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream info;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      info << " [failed: " << what << "]";
    }
  }
};

RunConfig rank_one(Algorithm a, int n, long long T) {
  const Objective f(RankOneQuadratic{n});
  return RunConfig{a, f, Geometry::entropy_simplex(n), f.analytic_link(NormPair::one_infinity), T};
}

int failures = 0;

void criterion(int id, const char* title, double limit_s, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.pass = false;
    v.info << " [exception: " << e.what() << "]";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.require(secs < limit_s, "runtime over " + format_double(limit_s) + " s");
  if (!v.pass) ++failures;
  std::printf("criterion %2d %s  %s:%s (%.2f s)\n", id, v.pass ? "PASS" : "FAIL", title, v.info.str().c_str(), secs);
  std::fflush(stdout);
}

}  // namespace

int main() {
  criterion(1, "mirror descent bound", 1.0, [](Verdict& v) {
    const RunRecord r = run(rank_one(Algorithm::md, 20, 1000));
    const double s = slope(r, {10, 1000}).slope;
    v.info << " L=" << r.constants.L << " D^2=" << r.constants.D_sq << " min slack="
           << r.invariants.min_bound_slack << " slope=" << s;
    v.require(std::abs(r.constants.L - 1.0) < 1e-12, "L == 1");
    v.require(std::abs(r.constants.D_sq - std::log(20.0)) < 1e-12, "D^2 == ln 20");
    v.require(r.invariants.bound_violations == 0 && r.invariants.min_bound_slack >= -1e-9, "gap <= D^2/(eta t)");
    v.require(s <= -0.9, "slope <= -0.9");
  });

  criterion(2, "accelerated mirror descent bound", 1.0, [](Verdict& v) {
    const RunRecord r = run(rank_one(Algorithm::amd, 20, 1000));
    const auto& k = r.invariants;
    const double s = slope(r, {20, 300}).slope;
    v.info << " L=" << r.constants.L << " tau=" << r.constants.tau << " eta=" << r.constants.eta
           << " bound violations=" << k.bound_violations << " min slack=" << k.min_bound_slack << " slope=" << s
           << " max e_t/(G/L)=" << k.max_e_ratio << " max grad ratio=" << std::max(k.max_grad_ratio, k.max_aux_grad_ratio);
    v.require(k.bound_violations == 0, "gap <= D^2 L/(eta t(t+1))");
    v.require(s <= -1.8, "slope <= -1.8");
    v.require(k.e_seq_violations == 0, "e_t <= G/L");
    v.require(k.grad_bound_violations == 0 && k.aux_grad_violations == 0, "gradient norms <= 2G");
  });

  criterion(3, "optimistic mirror descent and mirror prox bounds", 2.0, [](Verdict& v) {
    for (long long T : {100LL, 1000LL}) {
      const RunRecord o = run(rank_one(Algorithm::omd, 20, T));
      const RunRecord m = run(rank_one(Algorithm::mp, 20, T));
      const double ob = o.constants.D_sq / (o.constants.eta * static_cast<double>(T));
      const double mb = m.constants.D_sq / (m.constants.eta * static_cast<double>(T));
      const double og = *o.records.back().avg_gap, mg = *m.records.back().avg_gap;
      v.info << " T=" << T << ": omd " << og << "<=" << ob << ", mp " << mg << "<=" << mb << ";";
      v.require(og <= ob && o.invariants.bound_violations == 0, "omd average gap at T=" + std::to_string(T));
      v.require(mg <= mb && m.invariants.bound_violations == 0, "mp average gap at T=" + std::to_string(T));
      v.require(m.invariants.descent_violations == 0, "mp descent");
      v.require(o.invariants.stability_violations == 0, "omd stability");
    }
  });

  criterion(4, "stochastic mirror descent", 30.0, [](Verdict& v) {
    const int seeds = 20;
    std::vector<RunRecord> recs(seeds);
#pragma omp parallel for schedule(dynamic)
    for (int s = 0; s < seeds; ++s) {
      RunConfig cfg = rank_one(Algorithm::smd, 10, 10000);
      cfg.seed = static_cast<std::uint64_t>(s);
      cfg.noise = NoiseModel({0.5, 0.5}, NoiseShape::coordinate_pair);
      recs[static_cast<std::size_t>(s)] = run(cfg);
    }
    std::vector<long long> t;
    std::vector<double> med;
    double max_ratio = 0.0, max_noise = 0.0;
    long long draws = 0;
    for (std::size_t j = 0; j < recs[0].records.size(); ++j) {
      std::vector<double> g;
      for (const auto& r : recs) g.push_back(theorem_gap(r.algorithm, r.records[j]));
      t.push_back(recs[0].records[j].t);
      med.push_back(median(g));
    }
    for (const auto& r : recs) {
      max_ratio = std::max(max_ratio, r.invariants.max_grad_ratio);
      max_noise = std::max(max_noise, r.invariants.max_noise_ratio);
      draws += r.invariants.noise_samples;
    }
    const double s = slope_of_curve("smd", t, med, {100, 10000}).slope;
    v.info << " median slope=" << s << " max |grad|/G=" << max_ratio << " noise draws=" << draws
           << " max |noise|/sigma=" << max_noise;
    v.require(s >= -0.7 && s <= -0.35, "slope in [-0.7, -0.35]");
    v.require(max_ratio <= 3.0, "gradient norm <= 3G");
    v.require(max_noise <= 1.0 + 1e-12, "noise bound");
  });

  criterion(5, "self-bounding inequality", 5.0, [](Verdict& v) {
    const std::vector<Objective> objs{
        Objective(RankOneQuadratic{10}),
        make_objective("logistic_kernel", {{"n", "10"}, {"w_seed", "1"}}),
        make_objective("logistic_regression", {{"n", "10"}, {"w_seed", "1"}})};
    for (const Objective& f : objs) {
      Rng rng(17);
      std::vector<Vector> pts;
      for (int i = 0; i < 1000; ++i) pts.push_back(sample_domain_point(Domain::simplex(f.dim()), rng));
      const double fstar = *f.ambient_infimum();
      for (NormPair pair : {NormPair::euclidean, NormPair::one_infinity}) {
        const auto rep = check_self_bounding(f, pair, f.analytic_link(pair), pts, fstar);
        v.info << " " << f.id() << "/" << to_string(pair) << " worst=" << rep.worst_relative_margin << ";";
        v.require(rep.violations.empty(), f.id() + " " + to_string(pair));
      }
    }
  });

  criterion(6, "prox oracle equivalence", 10.0, [](Verdict& v) {
    double worst = 0.0;
    for (int n : {2, 3, 5})
      for (const Geometry& g : {Geometry::entropy_simplex(n), Geometry::euclidean_ball(Vector::Zero(n), 1.0)})
        worst = std::max(worst, compare_prox_to_oracle(g, 200, derive_seed(6, static_cast<std::uint64_t>(n))).max_deviation);
    v.info << " max deviation=" << worst;
    v.require(worst <= 1e-8, "deviation <= 1e-8");
  });

  criterion(7, "rank-one induced norms", 1.0, [](Verdict& v) {
    double worst = 0.0;
    for (int n : {5, 20, 50}) {
      const Objective f(RankOneQuadratic{n});
      Rng rng(static_cast<std::uint64_t>(n));
      const Vector x = sample_domain_point(Domain::simplex(n), rng);
      worst = std::max(worst, std::abs(induced_hess_norm(f, x, NormPair::euclidean) - (n - 1)));
      worst = std::max(worst, std::abs(induced_hess_norm(f, x, NormPair::one_infinity) - 1.0));
    }
    v.info << " max error=" << worst;
    v.require(worst <= 1e-6, "error <= 1e-6");
  });

  criterion(8, "logistic link slopes", 5.0, [](Verdict& v) {
    const int n = 10;
    for (const char* id : {"logistic_kernel", "logistic_regression"}) {
      const Objective f = make_objective(id, {{"n", "10"}, {"w_seed", "1"}});
      const Vector& w = f.id() == "logistic_kernel" ? std::get<LogisticKernel>(f.kind()).w
                                                    : std::get<LogisticRegression>(f.kind()).w;
      const AffineFit e = fit_affine(sample_links(f, NormPair::euclidean, 500, 8));
      const AffineFit o = fit_affine(sample_links(f, NormPair::one_infinity, 500, 8));
      const double w2 = w.norm(), wi = w.cwiseAbs().maxCoeff();
      const double r = e.L1 > 0.0 ? o.L1 / e.L1 : std::nan("");
      v.info << " " << id << ": L1_hat=" << e.L1 << " (|w|_2=" << w2 << ") L1_tilde=" << o.L1 << " (|w|_inf=" << wi
             << ") ratio=" << r << ";";
      v.require(std::abs(e.L1 - w2) <= 0.05 * w2, std::string(id) + " euclidean slope");
      v.require(std::abs(o.L1 - wi) <= 0.05 * wi, std::string(id) + " one_infinity slope");
      v.require(r >= 1.0 / std::sqrt(n) - 0.02 && r <= 1.02, std::string(id) + " slope ratio");
    }
  });

  criterion(9, "dimension ratio exponent", 300.0, [](Verdict& v) {
    ProfileOptions opt;
    for (int n = 6; n <= 99; n += 3) opt.dims.push_back(n);
    opt.samples = 500;
    const ProfileResult res = profile(opt);
    v.info << " a=" << res.fit->a << " b=" << res.fit->b << " log residual=" << res.fit->residual;
    v.require(res.fit->b >= 0.3 && res.fit->b <= 0.5, "b in [0.3, 0.5]");
  });

  criterion(10, "effective smoothness solver", 1.0, [](Verdict& v) {
    double worst = 0.0;
    for (double F : {0.1, 1.0, 10.0})
      for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
          const double L0 = 0.1 + 9.9 * i / 9.0, L1 = 0.1 + 9.9 * j / 9.0;
          const LinkFunction l = LinkFunction::affine(L0, L1);
          const double c = *closed_form_G(l, F), b = bisect_G(l, F);
          worst = std::max(worst, std::abs(c - b) / std::max(1.0, c));
        }
    v.info << " affine max rel diff=" << worst << ";";
    v.require(worst <= 1e-10, "affine closed form vs bisection");
    for (double beta : {0.0, 0.5, 1.0, 1.5})
      for (double F : {0.1, 1.0, 10.0}) {
        const double G = solve_G(LinkFunction::power(1.0, beta), F).G;
        const double cap = 2.0 * std::pow(F, 1.0 / (2.0 - beta));
        if (G > cap + 1e-9) {  // beta = 1 ties exactly, up to the link floor
          v.info << " power beta=" << beta << " F=" << F << ": G=" << G << " > " << cap << ";";
          v.require(false, "power G <= 2 F^(1/(2-beta)) at beta=" + format_double(beta) + ", F=" + format_double(F));
        }
      }
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures;
}
