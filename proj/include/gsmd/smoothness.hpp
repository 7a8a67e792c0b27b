#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gsmd {

/// Positivity offset added to link families that would otherwise vanish at 0.
inline constexpr double kLinkFloor = 1e-12;

struct ConstantLink {
  double L;
};

struct AffineLink {
  double L0;
  double L1;
};

/// l(a) = c (a/2)^beta + kLinkFloor, beta in [0, 2).
struct PowerLink {
  double c;
  double beta;
};

/// Piecewise-linear through the breakpoints (first breakpoint at a = 0),
/// continued linearly past the last one with the declared terminal slope.
struct TabulatedLink {
  std::vector<std::pair<double, double>> points;
  double terminal_slope;
  double terminal_degree;
};

/// Non-decreasing, strictly positive, sub-quadratic link function l bounding
/// the induced Hessian norm by a function of the gradient's dual norm.
class LinkFunction {
 public:
  using Family = std::variant<ConstantLink, AffineLink, PowerLink, TabulatedLink>;

  static LinkFunction constant(double L);
  static LinkFunction affine(double L0, double L1);
  static LinkFunction power(double c, double beta);
  static LinkFunction tabulated(std::vector<std::pair<double, double>> points, double terminal_slope,
                                double terminal_degree = 1.0);

  double operator()(double alpha) const;

  const Family& family() const { return family_; }
  std::string family_name() const;
  std::string describe() const;

  /// Same family with every value multiplied by `s` > 0.
  LinkFunction scaled(double s) const;

 private:
  explicit LinkFunction(Family f) : family_(std::move(f)) {}
  Family family_;
};

/// (G, L) of the self-bounding characterization: G is the largest alpha with
/// alpha^2 <= 2 l(2 alpha) F, and L = l(factor * G).
struct EffectiveSmoothness {
  double G = 0.0;
  double L = 0.0;
  double factor = 2.0;
  double F = 0.0;
};

/// Closed-form G for constant, affine, and power links (the power form ignores
/// the positivity offset). Empty for tabulated links.
std::optional<double> closed_form_G(const LinkFunction& link, double F);

/// G by doubling then bisection on h(a) = a^2 - 2 F l(2a).
double bisect_G(const LinkFunction& link, double F);

/// Solve for (G, L). factor is 2 for most methods and 4 for the accelerated one.
EffectiveSmoothness solve_G(const LinkFunction& link, double F, double factor = 2.0);

/// G for an affine link when l is evaluated at alpha rather than 2 alpha:
/// F L1 + sqrt(2 F L0 + F^2 L1^2). Documented alternate form; not used for
/// step sizes.
double affine_G_unscaled_argument(double L0, double L1, double F);

}  // namespace gsmd
