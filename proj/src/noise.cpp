#include "gsmd/noise.hpp"

#include <cmath>

#include "gsmd/error.hpp"

namespace gsmd {

std::string to_string(NoiseShape shape) {
  return shape == NoiseShape::sign_flip ? "sign_flip" : "coordinate_pair";
}

NoiseShape noise_shape_from_string(const std::string& name) {
  if (name == "sign_flip") return NoiseShape::sign_flip;
  if (name == "coordinate_pair") return NoiseShape::coordinate_pair;
  throw DomainError("unknown noise shape '" + name + "'");
}

NoiseModel::NoiseModel(std::vector<double> sigma_coeffs, NoiseShape shape, std::optional<Vector> direction)
    : coeffs_(std::move(sigma_coeffs)), shape_(shape), direction_(std::move(direction)) {
  if (coeffs_.empty()) throw DomainError("noise model needs at least one sigma coefficient");
  for (double c : coeffs_) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("sigma coefficients must be finite and >= 0");
  }
  if (direction_ && !direction_->allFinite()) throw DomainError("noise direction must be finite");
  if (direction_ && direction_->isZero(0.0)) throw DomainError("noise direction must be non-zero");
}

bool NoiseModel::degenerate() const {
  for (double c : coeffs_)
    if (c != 0.0) return false;
  return true;
}

double NoiseModel::sigma(double alpha) const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("sigma argument must be finite and >= 0");
  double v = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) v = v * alpha + *it;
  return v;
}

Vector alternating_direction(int n, NormPair pair) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = (i % 2 == 0) ? 1.0 : -1.0;
  return v / dual_norm(pair, v);
}

Vector NoiseModel::sample(const Vector& grad, NormPair pair, Rng& rng) const {
  if (!grad.allFinite()) throw DomainError("noise sample: gradient has non-finite entries");
  const int n = static_cast<int>(grad.size());
  const double bound = sigma(dual_norm(pair, grad));
  if (shape_ == NoiseShape::coordinate_pair) {
    const auto i = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(n)));
    const double s = rng.sign();
    Vector eps = Vector::Zero(n);
    eps[i] = s * bound;
    return eps;
  }
  const double s = rng.sign();
  Vector eps;
  if (direction_) {
    if (direction_->size() != n) throw DomainError("noise direction has the wrong dimension");
    eps = (s * bound / dual_norm(pair, *direction_)) * *direction_;
  } else {
    eps = (s * bound) * alternating_direction(n, pair);
  }
  // rounding in the rescale can overshoot sigma by an ulp; pull back so the bound holds exactly
  while (dual_norm(pair, eps) > bound) eps *= 1.0 - 0x1.0p-52;
  return eps;
}

}  // namespace gsmd
