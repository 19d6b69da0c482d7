#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "suglg/rng.hpp"
#include "suglg/spatial.hpp"
#include "suglg/types.hpp"

namespace suglg {

enum class ModelKind { Gaus, Sug, Glg, Suglg };

/// Accepts GAUS, SUG, GLG, SUGLG (case-insensitive).
ModelKind parse_model_kind(std::string_view name);
std::string to_string(ModelKind kind);

/// Kinds with the skew latent U (alpha free).
constexpr bool is_skew(ModelKind k) { return k == ModelKind::Sug || k == ModelKind::Suglg; }
/// Kinds with the log-Gaussian mixing field (lambda, nu, theta_lambda free).
constexpr bool is_mixture(ModelKind k) { return k == ModelKind::Glg || k == ModelKind::Suglg; }

inline constexpr ModelKind kAllKinds[] = {ModelKind::Gaus, ModelKind::Sug, ModelKind::Glg,
                                          ModelKind::Suglg};

/// Interval (lo, hi) known to contain a censored value.
struct CensorInterval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double y) const { return y >= lo && y <= hi; }
};

/// Sites with either an exact value or a censoring interval.
///
/// `values[i]` is NaN exactly when site i is censored; `intervals[i]` is
/// meaningful only for censored sites.
struct SpatialDataset {
  Locations coords;
  Matrix design;
  Vector values;
  std::vector<CensorInterval> intervals;
  std::vector<std::string> ids;

  Index size() const { return coords.rows(); }
  bool is_censored(Index i) const { return std::isnan(values[i]); }
  std::vector<Index> exact_indices() const;
  std::vector<Index> censored_indices() const;

  /// Throws ValidationError on shape mismatches, empty exact set, bad
  /// intervals or coincident sites.
  void validate() const;
};

/// Builds a dataset with a constant-mean design and all sites exact.
SpatialDataset make_exact_dataset(const Locations& coords, const Vector& values);

struct ModelParams {
  Vector beta;
  double alpha = 0.0;
  double sigma2 = 1.0;
  double omega2 = 0.1;
  double nu = 1.0;
  double theta_w = 1.0;
  double theta_lambda = 1.0;

  double tau2() const { return sigma2 * omega2; }
};

struct Hyperparams {
  double c0 = 1e4;
  double c1 = 1e5;
  double c2 = 1e-6;
  double c3 = 1e-6;
  double c4 = 0.1;
  double c5 = 9.0;
  double c6 = 0.5;
  double c7 = 1.5;
  double c8 = 0.7;
  double c9 = 0.7;

  void validate() const;
};

/// Sum of the active prior log-densities, expressed in (sigma2, omega2)
/// coordinates. Returns -inf outside the parameter domain.
double log_prior(const ModelParams& params, const Hyperparams& hyper, double med_d, ModelKind kind);

// Scalar prior components, exposed for tests.
double log_prior_sigma2(double sigma2, double c2, double c3);
double log_prior_omega2(double omega2, double c4, double c5);
double log_prior_theta(double theta, double c, double med_d);

/// log N(y; X beta + alpha Lambda^{-1/2} u, sigma2 B).
double conditional_loglik(const Vector& y, const Vector& u, const Vector& lambda,
                          const ModelParams& params, const SpatialDataset& ds, const Matrix& corr_w);
double conditional_loglik(const Vector& y, const Vector& u, const Vector& lambda,
                          const ModelParams& params, const SpatialDataset& ds);

/// Density of lambda when log(lambda) ~ N(-(nu/2) 1, nu C).
double lambda_field_logpdf(const Vector& lambda, double nu, const Matrix& corr_lambda);

struct LatentRecord {
  Vector lambda;
  Vector u;
  Vector v;
  Vector rho;
  Vector y;
};

struct SimulationResult {
  SpatialDataset dataset;
  LatentRecord latent;
};

/// Draws one realization of the generative model for the given kind.
SimulationResult simulate_dataset(Rng& rng, const Locations& locs, const Matrix& design,
                                  const ModelParams& truth, ModelKind kind);

/// Censors the `count` smallest exact values at (-inf, y_(count)].
SpatialDataset apply_left_censoring(const SpatialDataset& ds, Index count);

SpatialDataset inject_outliers(const SpatialDataset& ds, std::span<const Index> indices, double shift);

/// Draws parameters from the prior (used by the joint-distribution test).
ModelParams sample_prior(Rng& rng, const Hyperparams& hyper, double med_d, ModelKind kind, Index k);

/// Fixed parameter values for inactive components of `kind`.
ModelParams restrict_to_kind(ModelParams params, ModelKind kind);

// Simulation design on [0, 50]^2.

inline constexpr std::uint64_t kDesignSeed = 20121205;

/// 97 sites: one jittered point per 5 x 5 cell of a 10 x 10 grid, with
/// three cells left empty.
Locations design97_locations(std::uint64_t seed = kDesignSeed);

/// {12, 21, 28, 40} x {10, 20, 30, 40}.
Locations holdout_lattice();

/// Zero-based indices of the outlier cluster (one-based 29, 37, 59, 78, 84).
inline constexpr Index kOutlierSites[] = {28, 36, 58, 77, 83};

/// Truth used for the recovery experiment.
ModelParams design_truth();

struct DesignRealization {
  SpatialDataset dataset;      // 97 sites after outliers and censoring
  LatentRecord latent;         // per site, before outliers
  Locations holdout;           // the 16 lattice points
  Vector holdout_values;
};

/// Simulates the 97 sites and the hold-out lattice jointly under
/// design_truth(), adds `outlier_shift` at kOutlierSites, then left-censors
/// the `censor_count` smallest values.
DesignRealization simulate_design(Rng& rng, ModelKind kind, Index censor_count = 17, double outlier_shift = 2.0);

}  // namespace suglg
