#include "gsmd/smoothness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gsmd/error.hpp"

namespace gsmd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kRootTol = 1e-10;
constexpr int kMaxDoublings = 1000;
constexpr int kPositiveRun = 8;

}  // namespace

LinkFunction LinkFunction::constant(double L) {
  if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("constant link requires L > 0");
  return LinkFunction(ConstantLink{L});
}

LinkFunction LinkFunction::affine(double L0, double L1) {
  if (!(L0 > 0.0) || !std::isfinite(L0)) throw DomainError("affine link requires L0 > 0");
  if (!(L1 >= 0.0) || !std::isfinite(L1)) throw DomainError("affine link requires L1 >= 0");
  return LinkFunction(AffineLink{L0, L1});
}

LinkFunction LinkFunction::power(double c, double beta) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("power link requires c > 0");
  if (!(beta >= 0.0 && beta < 2.0)) throw DomainError("power link requires beta in [0, 2)");
  return LinkFunction(PowerLink{c, beta});
}

LinkFunction LinkFunction::tabulated(std::vector<std::pair<double, double>> points,
                                     double terminal_slope, double terminal_degree) {
  if (points.empty()) throw DomainError("tabulated link needs at least one breakpoint");
  if (points.front().first != 0.0) throw DomainError("tabulated link must start at alpha = 0");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].second > 0.0) || !std::isfinite(points[i].second))
      throw DomainError("tabulated link values must be positive and finite");
    if (i > 0) {
      if (!(points[i].first > points[i - 1].first)) throw DomainError("tabulated breakpoints must be strictly increasing");
      if (points[i].second < points[i - 1].second) throw DomainError("tabulated link must be non-decreasing");
    }
  }
  if (!(terminal_slope >= 0.0) || !std::isfinite(terminal_slope))
    throw DomainError("tabulated terminal slope must be >= 0");
  if (!(terminal_degree < 2.0)) throw DomainError("tabulated link must declare a terminal degree < 2");
  return LinkFunction(TabulatedLink{std::move(points), terminal_slope, terminal_degree});
}

double LinkFunction::operator()(double alpha) const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("link argument must be finite and >= 0");
  return std::visit(
      overloaded{
          [](const ConstantLink& l) { return l.L; },
          [&](const AffineLink& l) { return l.L0 + l.L1 * alpha; },
          [&](const PowerLink& l) { return l.c * std::pow(alpha / 2.0, l.beta) + kLinkFloor; },
          [&](const TabulatedLink& l) {
            const auto& p = l.points;
            if (alpha >= p.back().first) return p.back().second + l.terminal_slope * (alpha - p.back().first);
            auto it = std::upper_bound(p.begin(), p.end(), alpha,
                                       [](double a, const auto& pt) { return a < pt.first; });
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double w = (alpha - lo.first) / (hi.first - lo.first);
            return lo.second + w * (hi.second - lo.second);
          },
      },
      family_);
}

std::string LinkFunction::family_name() const {
  return std::visit(overloaded{
                        [](const ConstantLink&) { return std::string("constant"); },
                        [](const AffineLink&) { return std::string("affine"); },
                        [](const PowerLink&) { return std::string("power"); },
                        [](const TabulatedLink&) { return std::string("tabulated"); },
                    },
                    family_);
}

std::string LinkFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const ConstantLink& l) { os << "constant(L=" << l.L << ")"; },
                 [&](const AffineLink& l) { os << "affine(L0=" << l.L0 << ", L1=" << l.L1 << ")"; },
                 [&](const PowerLink& l) { os << "power(c=" << l.c << ", beta=" << l.beta << ")"; },
                 [&](const TabulatedLink& l) {
                   os << "tabulated(" << l.points.size() << " points, slope=" << l.terminal_slope << ")";
                 },
             },
             family_);
  return os.str();
}

LinkFunction LinkFunction::scaled(double s) const {
  if (!(s > 0.0)) throw DomainError("link scale must be > 0");
  return std::visit(overloaded{
                        [&](const ConstantLink& l) { return constant(s * l.L); },
                        [&](const AffineLink& l) { return affine(s * l.L0, s * l.L1); },
                        [&](const PowerLink& l) { return power(s * l.c, l.beta); },
                        [&](const TabulatedLink& l) {
                          auto pts = l.points;
                          for (auto& p : pts) p.second *= s;
                          return tabulated(std::move(pts), s * l.terminal_slope, l.terminal_degree);
                        },
                    },
                    family_);
}

std::optional<double> closed_form_G(const LinkFunction& link, double F) {
  if (!(F >= 0.0) || !std::isfinite(F)) throw DomainError("F must be finite and >= 0");
  return std::visit(overloaded{
                        [&](const ConstantLink& l) -> std::optional<double> { return std::sqrt(2.0 * F * l.L); },
                        [&](const AffineLink& l) -> std::optional<double> {
                          // a^2 = 2F (L0 + 2 L1 a)
                          const double b = 2.0 * F * l.L1;
                          return b + std::sqrt(b * b + 2.0 * F * l.L0);
                        },
                        [&](const PowerLink& l) -> std::optional<double> {
                          // a^2 = 2F c a^beta
                          if (F == 0.0) return 0.0;
                          return std::pow(2.0 * F * l.c, 1.0 / (2.0 - l.beta));
                        },
                        [](const TabulatedLink&) -> std::optional<double> { return std::nullopt; },
                    },
                    link.family());
}

double bisect_G(const LinkFunction& link, double F) {
  if (!(F >= 0.0) || !std::isfinite(F)) throw DomainError("F must be finite and >= 0");
  if (F == 0.0) return 0.0;
  auto h = [&](double a) { return a * a - 2.0 * F * link(2.0 * a); };

  // Walk up by doubling until h stays positive over a run of consecutive
  // points; the last non-positive point brackets the largest crossing.
  double a = 1e-12;
  double last_nonpos = 0.0;
  int positive_run = 0;
  for (int k = 0; k < kMaxDoublings && positive_run < kPositiveRun; ++k) {
    if (h(a) > 0.0) {
      ++positive_run;
    } else {
      positive_run = 0;
      last_nonpos = a;
    }
    a *= 2.0;
  }
  if (positive_run < kPositiveRun) throw ConvergenceError("solve_G: bracketing exceeded 1000 doublings");

  double lo = last_nonpos;
  double hi = last_nonpos == 0.0 ? 1e-12 : 2.0 * last_nonpos;
  if (h(hi) <= 0.0) {
    // Largest crossing lies further out within the positive run.
    while (h(hi) <= 0.0) {
      lo = hi;
      hi *= 2.0;
    }
  }
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (h(mid) <= 0.0) lo = mid;
    else hi = mid;
    if (hi - lo <= 1e-3 * kRootTol) break;
  }
  return lo;
}

EffectiveSmoothness solve_G(const LinkFunction& link, double F, double factor) {
  if (!(factor > 0.0)) throw DomainError("solve_G factor must be positive");
  EffectiveSmoothness out;
  out.F = F;
  out.factor = factor;
  const double bisected = bisect_G(link, F);
  const auto closed = closed_form_G(link, F);
  double G = bisected;
  if (closed && !std::holds_alternative<PowerLink>(link.family())) {
    if (std::abs(*closed - bisected) > kRootTol * std::max(1.0, *closed)) {
      throw NumericalError("solve_G: closed form and bisection disagree");
    }
    G = *closed;
  }
  out.G = G;
  out.L = link(factor * G);
  return out;
}

double affine_G_unscaled_argument(double L0, double L1, double F) {
  return F * L1 + std::sqrt(2.0 * F * L0 + F * F * L1 * L1);
}

}  // namespace gsmd
