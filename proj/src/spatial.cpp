#include "suglg/spatial.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace suglg {

Matrix distance_matrix(const Locations& locs) {
  const Index n = locs.rows();
  if (n < 2) throw ArgumentError("distance_matrix: need at least two locations");
  Matrix d(n, n);
  for (Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      const double h = (locs.row(i) - locs.row(j)).norm();
      if (h == 0.0)
        throw ValidationError("duplicate location: sites " + std::to_string(i) + " and " +
                              std::to_string(j) + " coincide");
      d(i, j) = h;
      d(j, i) = h;
    }
  }
  return d;
}

double median_distance(const Matrix& dist) {
  const Index n = dist.rows();
  if (n < 2) throw ArgumentError("median_distance: need at least two locations");
  std::vector<double> h;
  h.reserve(n * (n - 1) / 2);
  for (Index j = 1; j < n; ++j)
    for (Index i = 0; i < j; ++i) h.push_back(dist(i, j));
  const std::size_t mid = h.size() / 2;
  std::nth_element(h.begin(), h.begin() + mid, h.end());
  if (h.size() % 2 == 1) return h[mid];
  const double upper = h[mid];
  const double lower = *std::max_element(h.begin(), h.begin() + mid);
  return 0.5 * (lower + upper);
}

double median_distance(const Locations& locs) { return median_distance(distance_matrix(locs)); }

Matrix cross_distance(const Locations& from, const Locations& to) {
  Matrix d(from.rows(), to.rows());
  for (Index i = 0; i < from.rows(); ++i)
    for (Index j = 0; j < to.rows(); ++j) d(i, j) = (from.row(i) - to.row(j)).norm();
  return d;
}

Matrix build_b_matrix(const Matrix& corr_w, const Vector& lambda, double omega2) {
  const Index n = corr_w.rows();
  if (corr_w.cols() != n || lambda.size() != n) throw ArgumentError("build_b_matrix: dimension mismatch");
  if (!(lambda.array() > 0.0).all()) throw ArgumentError("build_b_matrix: lambda entries must be positive");
  const Vector d = lambda.array().rsqrt();
  Matrix b = d.asDiagonal() * corr_w * d.asDiagonal();
  b.diagonal().array() += omega2;
  return b;
}

Eigen::LLT<Matrix> factorize(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw FactorizationError(std::string(what) + ": matrix is not positive definite");
  return llt;
}

Eigen::LLT<Matrix> factorize_jittered(const Matrix& m, const char* what) {
  Matrix j = m;
  j.diagonal().array() += kDiagonalJitter;
  return factorize(j, what);
}

}  // namespace suglg
