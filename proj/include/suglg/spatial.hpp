#pragma once

#include "suglg/types.hpp"

namespace suglg {

/// Diagonal jitter added before factorizing correlation-derived matrices.
inline constexpr double kDiagonalJitter = 1e-10;

/// Range parameter of the exponential correlation exp(-h / theta).
struct CorrelationSpec {
  double theta = 1.0;
};

/// Euclidean distances. Throws ValidationError naming the first
/// coincident pair.
Matrix distance_matrix(const Locations& locs);

/// Median of the n(n-1)/2 distinct pairwise distances.
double median_distance(const Locations& locs);
double median_distance(const Matrix& dist);

/// Elementwise exp(-h / theta).
template <typename Derived>
Matrix exp_correlation(const Eigen::MatrixBase<Derived>& dist, const CorrelationSpec& spec) {
  if (!(spec.theta > 0.0)) throw ArgumentError("exp_correlation: theta must be positive");
  return (-dist.array() / spec.theta).exp().matrix();
}

/// Distances from each row of `from` to each row of `to`.
Matrix cross_distance(const Locations& from, const Locations& to);

/// Lambda^{-1/2} C Lambda^{-1/2} + omega2 I.
Matrix build_b_matrix(const Matrix& corr_w, const Vector& lambda, double omega2);

/// Cholesky of `m` with kDiagonalJitter on the diagonal.
Eigen::LLT<Matrix> factorize_jittered(const Matrix& m, const char* what);

/// Cholesky without jitter; throws FactorizationError on failure.
Eigen::LLT<Matrix> factorize(const Matrix& m, const char* what);

}  // namespace suglg
