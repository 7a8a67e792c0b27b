#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gsmd/geometry.hpp"
#include "gsmd/rng.hpp"

namespace gsmd {

enum class NoiseShape { sign_flip, coordinate_pair };

std::string to_string(NoiseShape shape);
NoiseShape noise_shape_from_string(const std::string& name);

/// Zero-mean gradient perturbation whose dual norm is almost surely bounded by
/// sigma(|grad f(x)|_*) for the polynomial sigma(a) = sum_i c_i a^i.
///
/// sign_flip returns +/- sigma * v for a fixed unit-dual-norm direction v;
/// coordinate_pair returns +/- sigma * e_i for a uniformly drawn axis i.
class NoiseModel {
 public:
  NoiseModel(std::vector<double> sigma_coeffs, NoiseShape shape, std::optional<Vector> direction = std::nullopt);

  double sigma(double alpha) const;
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool degenerate() const;
  const std::vector<double>& coeffs() const { return coeffs_; }
  NoiseShape shape() const { return shape_; }
  const std::optional<Vector>& direction() const { return direction_; }

  /// One perturbation for a gradient measured under `pair`.
  Vector sample(const Vector& grad, NormPair pair, Rng& rng) const;

 private:
  std::vector<double> coeffs_;
  NoiseShape shape_;
  std::optional<Vector> direction_;
};

/// Default sign_flip direction: alternating signs, scaled to unit dual norm.
Vector alternating_direction(int n, NormPair pair);

}  // namespace gsmd
