#pragma once

#include "gsmd/geometry.hpp"

namespace gsmd {

/// Numerical minimizer of <g, x> + B(x, y) over the geometry's domain that does
/// not use the closed-form prox: damped Newton in reduced simplex coordinates
/// for the entropy, and a bisection on the KKT multiplier for the ball.
/// Used as the reference the closed form is checked against.
Vector numeric_prox(const Geometry& geom, const Vector& y, const Vector& g);

/// Largest primal-norm deviation between prox_map and numeric_prox over
/// `pairs` random (y, g) draws; y is drawn from the domain interior and g has
/// i.i.d. N(0, scale^2) entries.
struct ProxOracleReport {
  int pairs = 0;
  double max_deviation = 0.0;
};

ProxOracleReport compare_prox_to_oracle(const Geometry& geom, int pairs, std::uint64_t seed,
                                        double scale = 1.0);
ProxOracleReport compare_prox_to_oracle_serial(const Geometry& geom, int pairs,
                                               std::uint64_t seed, double scale = 1.0);

/// Uniform sample from the domain (flat Dirichlet on the simplex, uniform in
/// the ball).
class Rng;
Vector sample_domain_point(const Domain& domain, Rng& rng);

}  // namespace gsmd
