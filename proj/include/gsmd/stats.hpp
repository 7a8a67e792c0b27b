#pragma once

#include <vector>

namespace gsmd {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double rms_residual = 0.0;
};

/// Ordinary least squares y ~ intercept + slope x. Throws DegenerateError with
/// fewer than two points or when all x are equal.
LineFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

double mean(const std::vector<double>& v);
double median(std::vector<double> v);

}  // namespace gsmd
