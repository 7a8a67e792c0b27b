// Independent reference computations used by the unit tests. Nothing here
// calls the closed forms under test.
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "gsmd/geometry.hpp"
#include "gsmd/objectives.hpp"
#include "gsmd/prox_oracle.hpp"

namespace oracle {

using gsmd::Vector;

inline double kl(const Vector& x, const Vector& y) {
  double s = 0.0;
  for (int i = 0; i < x.size(); ++i)
    if (x[i] > 0.0) s += x[i] * std::log(x[i] / y[i]);
  return s;
}

// Minimizes phi over [0, 1] by a grid scan followed by golden-section refinement.
inline double minimize_interval(const std::function<double(double)>& phi, double step = 1e-6) {
  double best = 0.0, fbest = phi(0.0);
  for (double s = step; s <= 1.0; s += step) {
    const double v = phi(s);
    if (v < fbest) {
      fbest = v;
      best = s;
    }
  }
  double lo = std::max(0.0, best - step), hi = std::min(1.0, best + step);
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 200; ++i) {
    const double a = hi - r * (hi - lo), b = lo + r * (hi - lo);
    if (phi(a) < phi(b)) hi = b; else lo = a;
  }
  return 0.5 * (lo + hi);
}

// Prox on the 1-simplex by scanning <g, x> + KL(x || y) over x = (s, 1 - s).
inline Vector grid_prox_2(const Vector& y, const Vector& g) {
  auto phi = [&](double s) {
    Vector x(2);
    x << s, 1.0 - s;
    return g.dot(x) + kl(x, y);
  };
  const double s = minimize_interval(phi);
  Vector x(2);
  x << s, 1.0 - s;
  return x;
}

inline Vector fd_gradient(const gsmd::Objective& f, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vector a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f.value(a) - f.value(b)) / (2 * h);
  }
  return g;
}

inline Vector fd_hessian_apply(const gsmd::Objective& f, const Vector& x, const Vector& v, double h = 1e-6) {
  return (f.gradient(x + h * v) - f.gradient(x - h * v)) / (2 * h);
}

// Straight-line mirror descent with the numeric prox.
inline Vector md_reference(const gsmd::Objective& f, const gsmd::Geometry& geom, double eta, int T) {
  Vector x = geom.argmin_psi();
  for (int t = 0; t < T; ++t) x = gsmd::numeric_prox(geom, x, eta * f.gradient(x));
  return x;
}

// Straight-line mirror prox with the numeric prox; returns the average of y.
inline Vector mp_reference(const gsmd::Objective& f, const gsmd::Geometry& geom, double eta, int T) {
  Vector x = geom.argmin_psi();
  Vector sum = Vector::Zero(x.size());
  for (int t = 0; t < T; ++t) {
    const Vector y = gsmd::numeric_prox(geom, x, eta * f.gradient(x));
    x = gsmd::numeric_prox(geom, x, eta * f.gradient(y));
    sum += y;
  }
  return sum / T;
}

// Largest a on a fine grid with a^2 <= 2 l(2a) F, refined by bisection.
inline double scan_G(const std::function<double(double)>& link, double F, double hi) {
  auto h = [&](double a) { return a * a - 2.0 * F * link(2.0 * a); };
  const int N = 200000;
  double last_ok = 0.0;
  for (int i = 0; i <= N; ++i) {
    const double a = hi * i / N;
    if (h(a) <= 0.0) last_ok = a;
  }
  double lo = last_ok, up = std::min(hi, last_ok + hi / N);
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + up);
    if (h(m) <= 0.0) lo = m; else up = m;
  }
  return lo;
}

// Least squares slope of y on x written out from the normal equations.
inline double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
