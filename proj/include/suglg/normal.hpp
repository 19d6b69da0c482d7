#pragma once

// Scalar standard-normal helpers.

namespace suglg {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double norm_pdf(double x);
double log_norm_pdf(double x);

/// P(Z <= x).
double norm_cdf(double x);

/// P(Z > x), accurate far into the upper tail.
double norm_sf(double x);

/// log P(Z <= x), accurate for very negative x.
double log_norm_cdf(double x);

/// Inverse of norm_cdf on (0, 1). Refined to full double precision.
double norm_quantile(double p);

/// Unrefined rational approximation of norm_quantile (relative error
/// ~1e-9); cheaper, used inside lattice rules.
double norm_quantile_approx(double p);

/// Inverse of norm_sf: returns x with P(Z > x) = q.
double norm_quantile_upper(double q);

}  // namespace suglg
