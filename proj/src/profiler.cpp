#include "gsmd/profiler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <Eigen/Eigenvalues>

#include "gsmd/error.hpp"
#include "gsmd/prox_oracle.hpp"
#include "gsmd/rng.hpp"
#include "gsmd/stats.hpp"

namespace gsmd {

namespace {

constexpr int kPowerIterations = 1000;
constexpr double kPowerTol = 1e-12;

Eigen::MatrixXd dense_hessian(const Objective& obj, const Vector& x) {
  const int n = obj.dim();
  Eigen::MatrixXd H(n, n);
  for (int j = 0; j < n; ++j) H.col(j) = obj.hessian_apply(x, Vector::Unit(n, j));
  return 0.5 * (H + H.transpose());
}

LinkSample draw(const Objective& obj, NormPair pair, std::uint64_t seed, int i) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
  LinkSample s;
  s.x = sample_domain_point(Domain::simplex(obj.dim()), rng);
  s.grad_norm = dual_norm(pair, obj.gradient(s.x));
  s.hess_norm = induced_hess_norm(obj, s.x, pair);
  return s;
}

ProfileRow profile_dim(const ProfileOptions& opt, int n) {
  if (n < 2) throw ValidationError("profile dimensions must be >= 2");
  ParamTable params = opt.params;
  params["n"] = std::to_string(n);
  const Objective obj = make_objective(opt.objective, params);
  const std::uint64_t seed = derive_seed(opt.seed, static_cast<std::uint64_t>(n));
  ProfileRow row;
  row.n = n;
  if (opt.euclidean) row.hat = fit_affine(sample_links_serial(obj, NormPair::euclidean, opt.samples, seed));
  if (opt.one_infinity) row.tilde = fit_affine(sample_links_serial(obj, NormPair::one_infinity, opt.samples, seed));
  if (row.hat && row.tilde) {
    if (row.hat->L1 > 0.0)
      row.ratio = row.tilde->L1 / row.hat->L1;
    else if (row.tilde->L1 == 0.0 && row.hat->L0 > 0.0)
      row.ratio = row.tilde->L0 / row.hat->L0;  // both links constant
  }
  return row;
}

ProfileResult finish(std::vector<ProfileRow> rows, const ProfileOptions& opt) {
  ProfileResult out;
  out.rows = std::move(rows);
  if (opt.euclidean && opt.one_infinity) {
    std::vector<int> dims;
    std::vector<double> ratios;
    for (const auto& r : out.rows) {
      if (!r.ratio) throw DegenerateError("Euclidean slope is zero at n=" + std::to_string(r.n) + "; ratio undefined");
      dims.push_back(r.n);
      ratios.push_back(*r.ratio);
    }
    if (dims.size() >= 2) out.fit = fit_power_law(dims, ratios);
  }
  return out;
}

}  // namespace

double hessian_spectral_norm(const Objective& obj, const Vector& x, const Vector& start) {
  const double start_norm = start.norm();
  if (!(start_norm > 0.0)) throw DomainError("power iteration needs a nonzero start vector");
  Vector v = start / start_norm;
  double lambda = 0.0;
  for (int k = 0; k < kPowerIterations; ++k) {
    const Vector hv = obj.hessian_apply(x, v);
    const double hn = hv.norm();
    if (hn == 0.0) {
      // v is in the kernel; a zero Hessian has norm 0, anything else needs the dense path
      if (k == 0 && dense_hessian(obj, x).cwiseAbs().maxCoeff() == 0.0) return 0.0;
      break;
    }
    const double next = v.dot(hv);
    v = hv / hn;
    if (k > 0 && std::abs(next - lambda) <= kPowerTol * std::abs(next)) {
      // Rayleigh quotient has settled; one more application for the final estimate
      return std::abs(v.dot(obj.hessian_apply(x, v)));
    }
    lambda = next;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense_hessian(obj, x), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw ConvergenceError("Hessian spectral norm did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double induced_hess_norm(const Objective& obj, const Vector& x, NormPair pair) {
  const int n = obj.dim();
  if (pair == NormPair::one_infinity) {
    double best = 0.0;
    for (int j = 0; j < n; ++j) best = std::max(best, obj.hessian_apply(x, Vector::Unit(n, j)).cwiseAbs().maxCoeff());
    return best;
  }
  Vector start(n);
  for (int i = 0; i < n; ++i) start[i] = 1.0 + 0.1 * std::sin(1.0 + i);
  return hessian_spectral_norm(obj, x, start);
}

std::vector<LinkSample> sample_links(const Objective& obj, NormPair pair, int n_samples, std::uint64_t seed) {
  std::vector<LinkSample> out(static_cast<std::size_t>(std::max(0, n_samples)));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_samples; ++i) out[static_cast<std::size_t>(i)] = draw(obj, pair, seed, i);
  return out;
}

std::vector<LinkSample> sample_links_serial(const Objective& obj, NormPair pair, int n_samples,
                                            std::uint64_t seed) {
  std::vector<LinkSample> out;
  out.reserve(static_cast<std::size_t>(std::max(0, n_samples)));
  for (int i = 0; i < n_samples; ++i) out.push_back(draw(obj, pair, seed, i));
  return out;
}

AffineFit fit_affine(const std::vector<LinkSample>& samples) {
  if (samples.empty()) throw DegenerateError("fit_affine: no samples");
  std::vector<double> g, h;
  for (const auto& s : samples) {
    g.push_back(s.grad_norm);
    h.push_back(s.hess_norm);
  }
  const auto [gmin, gmax] = std::minmax_element(g.begin(), g.end());
  AffineFit fit;
  auto constant_fit = [&] {
    fit.L1 = 0.0;
    fit.L0 = mean(h);
    double sse = 0.0;
    for (double v : h) sse += (v - fit.L0) * (v - fit.L0);
    fit.residual = std::sqrt(sse / static_cast<double>(h.size()));
  };
  const auto [hmin, hmax] = std::minmax_element(h.begin(), h.end());
  const bool flat = *hmax - *hmin <= 1e-12 * std::max(1.0, std::abs(*hmax));
  if (*gmin == *gmax || flat) {
    constant_fit();
    if (!flat) throw DegenerateError("fit_affine: all gradient norms are equal but Hessian norms vary");
    return fit;
  }
  const LineFit lf = linear_fit(g, h);
  if (lf.slope < 0.0) {
    constant_fit();
    return fit;
  }
  fit.L0 = lf.intercept;
  fit.L1 = lf.slope;
  fit.residual = lf.rms_residual;
  return fit;
}

RatioFit fit_power_law(const std::vector<int>& dims, const std::vector<double>& ratios) {
  if (dims.size() != ratios.size()) throw ValidationError("fit_power_law: dims and ratios differ in length");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (dims[i] <= 0 || !(ratios[i] > 0.0)) throw DegenerateError("fit_power_law needs positive dims and ratios");
    lx.push_back(std::log(static_cast<double>(dims[i])));
    ly.push_back(std::log(ratios[i]));
  }
  const LineFit lf = linear_fit(lx, ly);
  RatioFit fit;
  fit.a = std::exp(lf.intercept);
  fit.b = -lf.slope;
  fit.residual = lf.rms_residual;
  fit.dims = dims;
  fit.ratios = ratios;
  return fit;
}

ProfileResult profile(const ProfileOptions& opt) {
  if (opt.dims.empty()) throw ValidationError("profile needs at least one dimension");
  const int m = static_cast<int>(opt.dims.size());
  std::vector<ProfileRow> rows(opt.dims.size());
  std::vector<std::exception_ptr> errors(opt.dims.size());
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < m; ++k) {
    try {
      rows[static_cast<std::size_t>(k)] = profile_dim(opt, opt.dims[static_cast<std::size_t>(k)]);
    } catch (...) {
      errors[static_cast<std::size_t>(k)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return finish(std::move(rows), opt);
}

ProfileResult profile_serial(const ProfileOptions& opt) {
  if (opt.dims.empty()) throw ValidationError("profile needs at least one dimension");
  std::vector<ProfileRow> rows;
  for (int n : opt.dims) rows.push_back(profile_dim(opt, n));
  return finish(std::move(rows), opt);
}

}  // namespace gsmd
