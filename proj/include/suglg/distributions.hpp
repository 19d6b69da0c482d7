#pragma once

#include <span>

#include "suglg/normal.hpp"
#include "suglg/rng.hpp"
#include "suglg/types.hpp"

namespace suglg {

// ---------------------------------------------------------------------------
// Multivariate normal
// ---------------------------------------------------------------------------

/// Log-density of N(mean, L L') at x given the Cholesky factor of the
/// covariance.
template <typename DX, typename DM, typename Factor>
typename DX::Scalar mvn_logpdf_factored(const Eigen::MatrixBase<DX>& x,
                                        const Eigen::MatrixBase<DM>& mean,
                                        const Factor& llt) {
  using Scalar = typename DX::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z = llt.matrixL().solve(x - mean);
  const Scalar log_det = 2 * llt.matrixLLT().diagonal().array().log().sum();
  return Scalar(-0.5) * (z.squaredNorm() + log_det) -
         static_cast<Scalar>(x.size()) * Scalar(kLogSqrt2Pi);
}

/// log phi_n(x; mean, cov), evaluated through a Cholesky factorization.
template <typename DX, typename DM, typename DC>
typename DX::Scalar mvn_logpdf(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DM>& mean,
                               const Eigen::MatrixBase<DC>& cov) {
  using Scalar = typename DX::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (x.size() != mean.size() || cov.rows() != x.size() || cov.cols() != x.size())
    throw ArgumentError("mvn_logpdf: dimension mismatch");
  const Eigen::LLT<Mat> llt(cov.eval());
  if (llt.info() != Eigen::Success)
    throw FactorizationError("mvn_logpdf: covariance is not positive definite");
  return mvn_logpdf_factored(x, mean, llt);
}

struct ConditionalNormal {
  Vector mean;
  Matrix cov;
};

/// Distribution of the unobserved block given the observed block
/// (Schur complement). `observed_idx` must be a proper nonempty subset.
ConditionalNormal mvn_conditional(const Vector& mean, const Matrix& cov,
                                  std::span<const Index> observed_idx,
                                  const Vector& observed_vals);

// ---------------------------------------------------------------------------
// Truncated normal
// ---------------------------------------------------------------------------

/// Draw from N(mean, var) conditioned on x > lower.
double tn1_sample(Rng& rng, double lower, double mean, double var);

/// Draw from N(mean, var) conditioned on lo < x < hi (either side may be
/// infinite).
double tn_interval_sample(Rng& rng, double lo, double hi, double mean, double var);

/// E[X | X > lower] for X ~ N(mean, var).
double tn1_mean(double lower, double mean, double var);

/// Componentwise Gibbs sweeps for the canonical-form Gaussian
/// exp(-x'Qx/2 + h'x) restricted to the box lower < x < upper. Updates `x`
/// in place; `x` must start inside the box.
void tmvn_gibbs_canonical(Rng& rng, Vector& x, const Matrix& precision, const Vector& linear,
                          const Vector& lower, const Vector& upper, int sweeps);

/// One draw from N_n(mean, cov) restricted to {x : x_i > lower_i}.
///
/// Runs `sweeps` Gibbs sweeps over the univariate full conditionals. When
/// `start` is given the chain is warm-started there (it must satisfy the
/// bounds); otherwise each coordinate starts from its marginal truncated
/// normal.
Vector tmvn_sample(Rng& rng, const Vector& lower, const Vector& mean, const Matrix& cov,
                   int sweeps, const Vector* start = nullptr);

/// Exact draw by rejection from the untruncated normal. Only practical for
/// small dimensions; throws NumericalError after `max_tries` proposals.
Vector tmvn_sample_rejection(Rng& rng, const Vector& lower, const Vector& mean, const Matrix& cov,
                             long max_tries = 10'000'000);

// ---------------------------------------------------------------------------
// Unified skew-normal
// ---------------------------------------------------------------------------

/// SUN_{n,m}(mu, sigma, gamma, v, delta).
struct SunParams {
  Vector mu;      // n
  Matrix sigma;   // n x n covariance
  Matrix gamma;   // n x m
  Vector v;       // m
  Matrix delta;   // m x m correlation

  Index n() const { return mu.size(); }
  Index m() const { return v.size(); }

  /// Throws ArgumentError / FactorizationError when an invariant fails.
  void validate() const;
};

/// log of phi_n(x; mu, sigma) Phi_m(gamma' sigma^-1 (x - mu); v, delta - gamma' sigma^-1 gamma)
///        / Phi_m(0; v, delta).
double sun_logpdf(const Vector& x, const SunParams& params);

/// alpha U + sigma V with U ~ TN_n(0; 0, corr) and V ~ N_n(0, corr).
///
/// U is drawn exactly by rejection for n <= 12 and by 200 warm Gibbs sweeps
/// otherwise.
Vector sun_sample(Rng& rng, double alpha, double sigma, const Matrix& corr);

// ---------------------------------------------------------------------------
// Generalized inverse Gaussian
// ---------------------------------------------------------------------------

/// GIG(p, a, b) with density proportional to x^(p-1) exp{-(a^2/x + b^2 x)/2}
/// on x > 0.
struct GigParams {
  double p = 0.0;
  double a = 0.0;
  double b = 0.0;

  void validate() const;
};

double gig_sample(Rng& rng, const GigParams& params);

/// Normalized log-density. Handles the Gamma (a = 0) and inverse-Gamma
/// (b = 0) limits.
double gig_logpdf(double x, const GigParams& params);

/// E[X] under GIG(p, a, b).
double gig_mean(const GigParams& params);

}  // namespace suglg
