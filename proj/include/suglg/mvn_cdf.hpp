#pragma once

#include <functional>

#include "suglg/types.hpp"

namespace suglg {

/// P(X < h, Y < k) for a standard bivariate normal with correlation rho
/// (Drezner-Wesolowsky / Genz Gauss-Legendre scheme, ~1e-15 accuracy).
double bvn_cdf(double h, double k, double rho);

struct CdfOptions {
  double abs_tol = 1e-8;
  /// Dimensions up to this value use nested adaptive quadrature; above it
  /// a randomized lattice rule with a fixed seed is used.
  Index max_quadrature_dim = 4;
  long max_lattice_points = 1 << 20;
};

/// P(X <= upper) for X ~ N(0, cov).
///
/// m = 1 and m = 2 are evaluated in closed form / by bvn_cdf; m = 3..4 by
/// conditioning on the first coordinate and integrating the (m-1)-variate
/// cdf with adaptive Gauss-Legendre quadrature; larger m by Genz's
/// separation-of-variables transform with a shifted Richtmyer lattice.
/// Every path is deterministic. Throws NumericalError when the error
/// estimate exceeds `abs_tol`.
double mvn_cdf(const Vector& upper, const Matrix& cov, const CdfOptions& opts = {});

/// log P(X > 0) for X ~ N(0, corr), estimated with a fixed-point
/// separation-of-variables lattice rule (deterministic in `corr`).
double log_orthant_probability(const Matrix& corr, int points);

/// Adaptive 10-point Gauss-Legendre quadrature on a finite interval.
/// The per-subinterval tolerance never drops below 1e-15. Throws
/// NumericalError if it is not met within `max_depth` bisections.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_depth = 40);

}  // namespace suglg
