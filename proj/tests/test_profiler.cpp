#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gsmd/error.hpp"
#include "gsmd/profiler.hpp"
#include "gsmd/rng.hpp"
#include "gsmd/stats.hpp"
#include "oracles.hpp"

using namespace gsmd;

namespace {

Vector random_w(int n, std::uint64_t seed) {
  Rng rng(seed);
  Vector w(n);
  for (int i = 0; i < n; ++i) w[i] = 2.0 * rng.uniform() - 1.0;
  return w;
}

LinkSample pt(double g, double h) { return LinkSample{g, h, Vector()}; }

}  // namespace

TEST_CASE("rank-one induced norms are n-1 and 1") {
  for (int n : {5, 20, 50}) {
    const Objective f(RankOneQuadratic{n});
    Rng rng(n);
    for (int k = 0; k < 3; ++k) {
      Vector x(n);
      for (int i = 0; i < n; ++i) x[i] = rng.uniform_open0();
      x /= x.sum();
      CHECK(induced_hess_norm(f, x, NormPair::euclidean) == doctest::Approx(n - 1).epsilon(1e-10));
      CHECK(induced_hess_norm(f, x, NormPair::one_infinity) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("zero Hessian gives zero induced norm") {
  const Objective f(LogisticKernel{Vector::Zero(4), 0.0, 1.0});
  const Vector x = Vector::Constant(4, 0.25);
  CHECK(induced_hess_norm(f, x, NormPair::euclidean) == 0.0);
  CHECK(induced_hess_norm(f, x, NormPair::one_infinity) == 0.0);
}

TEST_CASE("spectral norm does not depend on the restart vector") {
  const Objective f(AppendixMix{12});
  const Vector x = Vector::Constant(12, 1.0 / 12);
  Vector x2 = x;
  x2[3] += 0.2;
  x2 /= x2.sum();
  for (const Vector& p : {x, x2}) {
    const double ref = hessian_spectral_norm(f, p, Vector::Ones(12));
    Rng rng(5);
    for (int k = 0; k < 5; ++k) {
      Vector s(12);
      for (int i = 0; i < 12; ++i) s[i] = 0.1 + rng.uniform();
      CHECK(std::abs(hessian_spectral_norm(f, p, s) - ref) <= 1e-10 * ref);
    }
  }
}

TEST_CASE("one_infinity norm matches a dense Hessian") {
  const int n = 7;
  const Objective f(AppendixMix{n});
  Vector x = Vector::LinSpaced(n, 1.0, 2.0);
  x /= x.sum();
  double best = 0.0;
  for (int j = 0; j < n; ++j) {
    const Vector col = oracle::fd_hessian_apply(f, x, Vector::Unit(n, j));
    best = std::max(best, col.cwiseAbs().maxCoeff());
  }
  CHECK(induced_hess_norm(f, x, NormPair::one_infinity) == doctest::Approx(best).epsilon(1e-5));
}

TEST_CASE("sample_links with zero samples is empty") {
  CHECK(sample_links(Objective(RankOneQuadratic{4}), NormPair::euclidean, 0, 1).empty());
}

TEST_CASE("rank-one samples have constant Hessian norm") {
  const Objective f(RankOneQuadratic{10});
  const auto e = sample_links(f, NormPair::euclidean, 500, 3);
  const auto o = sample_links(f, NormPair::one_infinity, 500, 3);
  REQUIRE(e.size() == 500);
  for (const auto& s : e) CHECK(s.hess_norm == doctest::Approx(9.0).epsilon(1e-10));
  for (const auto& s : o) CHECK(s.hess_norm == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(e[i].x.sum() == doctest::Approx(1.0));
    CHECK(e[i].x.minCoeff() > 0.0);
    CHECK(e[i].x == o[i].x);
  }
  const AffineFit fit = fit_affine(e);
  CHECK(fit.L1 == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(fit.L0 == doctest::Approx(9.0).epsilon(1e-9));
}

TEST_CASE("appendix_mix(20) Euclidean scatter is close to affine") {
  const auto s = sample_links(Objective(AppendixMix{20}), NormPair::euclidean, 500, 11);
  const AffineFit fit = fit_affine(s);
  double m = 0.0;
  for (const auto& p : s) m += p.hess_norm;
  m /= static_cast<double>(s.size());
  CHECK(fit.residual / m < 0.2);
}

TEST_CASE("fit_affine examples") {
  SUBCASE("exact line") {
    const AffineFit f = fit_affine({pt(1, 2), pt(2, 4)});
    CHECK(f.L0 == doctest::Approx(0.0).scale(1.0));
    CHECK(f.L1 == doctest::Approx(2.0));
    CHECK(f.residual == doctest::Approx(0.0).scale(1.0));
  }
  SUBCASE("constant hess norm") {
    const AffineFit f = fit_affine({pt(1, 3), pt(2, 3), pt(5, 3)});
    CHECK(f.L0 == doctest::Approx(3.0));
    CHECK(f.L1 == doctest::Approx(0.0).scale(1.0));
  }
  SUBCASE("negative slope is clamped") {
    const AffineFit f = fit_affine({pt(1, 4), pt(2, 3), pt(3, 2)});
    CHECK(f.L1 == 0.0);
    CHECK(f.L0 == doctest::Approx(3.0));
  }
  SUBCASE("all grad norms equal") {
    const AffineFit f = fit_affine({pt(2, 5), pt(2, 5)});
    CHECK(f.L1 == 0.0);
    CHECK(f.L0 == doctest::Approx(5.0));
    CHECK_THROWS_AS(fit_affine({pt(2, 5), pt(2, 6)}), DegenerateError);
  }
  SUBCASE("empty") { CHECK_THROWS_AS(fit_affine({}), DegenerateError); }
}

TEST_CASE("logistic kernel fits recover the analytic slopes") {
  const int n = 10;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Objective f = make_objective("logistic_kernel", {{"n", "10"}, {"w_seed", std::to_string(seed)}});
    const Vector& w = std::get<LogisticKernel>(f.kind()).w;
    const AffineFit e = fit_affine(sample_links(f, NormPair::euclidean, 500, 7));
    const AffineFit o = fit_affine(sample_links(f, NormPair::one_infinity, 500, 7));
    CHECK(std::abs(e.L1 - w.norm()) <= 0.05 * w.norm());
    CHECK(std::abs(o.L1 - w.cwiseAbs().maxCoeff()) <= 0.05 * w.cwiseAbs().maxCoeff());
    const double r = o.L1 / e.L1;
    CHECK(r >= 1.0 / std::sqrt(n) - 0.02);
    CHECK(r <= 1.02);
  }
}

// hess = |w| g - g^2 / C sample by sample, so the affine slope sits below |w|.
TEST_CASE("logistic regression samples follow the concave law") {
  const Objective f = make_objective("logistic_regression", {{"n", "10"}, {"w_seed", "4"}, {"C", "2"}});
  const auto& lr = std::get<LogisticRegression>(f.kind());
  for (NormPair pair : {NormPair::euclidean, NormPair::one_infinity}) {
    const double wn = dual_norm(pair, lr.w);
    const auto s = sample_links(f, pair, 200, 3);
    for (const auto& p : s)
      CHECK(p.hess_norm == doctest::Approx(wn * p.grad_norm - p.grad_norm * p.grad_norm / lr.C).epsilon(1e-9));
    CHECK(fit_affine(s).L1 <= wn);
  }
}

TEST_CASE("logistic kernel intercept is near zero") {
  const auto s = sample_links(Objective(LogisticKernel{random_w(10, 9), 0.0, 1.0}), NormPair::one_infinity, 500, 1);
  const AffineFit f = fit_affine(s);
  std::vector<double> g;
  for (const auto& p : s) g.push_back(p.grad_norm);
  CHECK(std::abs(f.L0) <= 0.05 * f.L1 * median(g));
}

TEST_CASE("power-law recovery is exact") {
  std::vector<int> dims;
  std::vector<double> r;
  for (int n = 6; n <= 198; n += 3) {
    dims.push_back(n);
    r.push_back(1.5 * std::pow(n, -0.4));
  }
  const RatioFit f = fit_power_law(dims, r);
  CHECK(std::abs(f.a - 1.5) <= 1e-10);
  CHECK(std::abs(f.b - 0.4) <= 1e-10);
  CHECK(f.residual <= 1e-12);
}

TEST_CASE("rank-one ratio exponent matches the direct regression") {
  ProfileOptions opt;
  opt.objective = "rank_one_quadratic";
  opt.samples = 20;
  for (int n = 6; n <= 48; n += 3) opt.dims.push_back(n);
  const ProfileResult res = profile(opt);
  REQUIRE(res.fit);
  std::vector<double> lx, ly;
  for (int n : opt.dims) {
    lx.push_back(std::log(n));
    ly.push_back(std::log(1.0 / (n - 1)));
  }
  CHECK(res.fit->b == doctest::Approx(-oracle::ols_slope(lx, ly)).epsilon(1e-8));
  for (const auto& row : res.rows) CHECK(*row.ratio == doctest::Approx(1.0 / (row.n - 1)).epsilon(1e-8));
}

TEST_CASE("profile with one pair has no ratio fit") {
  ProfileOptions opt;
  opt.objective = "rank_one_quadratic";
  opt.samples = 5;
  opt.dims = {4, 6};
  opt.one_infinity = false;
  const ProfileResult res = profile(opt);
  CHECK_FALSE(res.fit);
  CHECK(res.rows[0].hat);
  CHECK_FALSE(res.rows[0].tilde);
  CHECK_FALSE(res.rows[0].ratio);
}

TEST_CASE("profile rejects tiny dimensions") {
  ProfileOptions opt;
  opt.dims = {1};
  CHECK_THROWS_AS(profile(opt), ValidationError);
}
