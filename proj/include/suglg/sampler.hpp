#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "suglg/distributions.hpp"
#include "suglg/model.hpp"

namespace suglg {

/// Current values of every unknown in the augmented posterior.
struct McmcState {
  Vector y;       // all sites; censored slots hold imputations
  Vector u;       // zero for non-skew kinds
  Vector lambda;  // one for non-mixture kinds
  ModelParams params;
};

enum class Sigma2Mode { Conjugate, Metropolis };
enum class Omega2Mode { Metropolis, Gig };

/// Random-walk standard deviations on the log scale.
struct ProposalScales {
  double sigma2 = 0.5;
  double omega2 = 0.5;
  double nu = 0.5;
  double lambda = 0.5;
  double theta_w = 0.5;
  double theta_lambda = 0.5;
};

struct ChainConfig {
  long length = 20000;
  long burn_in = 10000;
  long thin = 10;
  std::uint64_t seed = 1;
  ModelKind kind = ModelKind::Suglg;
  Hyperparams hyper;
  ProposalScales proposal;
  bool adapt = true;
  Sigma2Mode sigma2_mode = Sigma2Mode::Conjugate;
  Omega2Mode omega2_mode = Omega2Mode::Metropolis;
  int u_sweeps = 1;
  /// Lattice size for the truncated-normal normalizer; 0 picks by n.
  int orthant_points = 0;

  static ChainConfig quick();
  static ChainConfig paper();

  long retained() const { return (length - burn_in) / thin; }
  void validate() const;
};

struct ChainOutput {
  ModelKind kind = ModelKind::Suglg;
  std::vector<Index> censored;
  std::vector<ModelParams> params;
  Matrix lambda;      // draws x n
  Matrix u;           // draws x n
  Matrix y_imputed;   // draws x censored.size()
  /// log p(y_J | u, lambda, eta) per draw.
  Vector log_conditional;
  std::map<std::string, double> acceptance;

  Index size() const { return static_cast<Index>(params.size()); }

  /// Observed values with draw `d`'s imputations filled in.
  Vector completed_y(Index d, const SpatialDataset& ds) const;
};

/// Names of the active parameters, in chain.csv column order.
std::vector<std::string> parameter_names(ModelKind kind, Index k);
Vector parameter_vector(const ModelParams& p, ModelKind kind);

/// Draws x active-parameter matrix.
Matrix parameter_table(const ChainOutput& chain);

/// exp(-h Q h'/2 + h'x) truncated to x > 0.
struct CanonicalForm {
  Matrix precision;
  Vector linear;
};

/// Data-augmentation sampler over (y_I, U, lambda, eta) for one dataset.
///
/// Steps read and write an external McmcState. Factorizations that depend
/// on the state are cached against the parameter values they were built
/// from, so steps may be called in any order.
class Sampler {
 public:
  Sampler(const SpatialDataset& ds, ChainConfig cfg);

  const SpatialDataset& dataset() const { return ds_; }
  const ChainConfig& config() const { return cfg_; }
  double med_d() const { return med_d_; }
  const Matrix& distances() const { return dist_; }

  McmcState initial_state(Rng& rng);

  void step_censored(Rng& rng, McmcState& s);
  void step_u(Rng& rng, McmcState& s);
  void step_lambda(Rng& rng, McmcState& s);
  void step_beta(Rng& rng, McmcState& s);
  void step_alpha(Rng& rng, McmcState& s);
  void step_sigma2(Rng& rng, McmcState& s);
  void step_omega2(Rng& rng, McmcState& s);
  void step_nu(Rng& rng, McmcState& s);
  void step_theta_w(Rng& rng, McmcState& s);
  void step_theta_lambda(Rng& rng, McmcState& s);

  /// One scan in the fixed order censored, U, lambda, beta, alpha, sigma2,
  /// omega2, nu, theta_w, theta_lambda (inactive blocks skipped).
  void sweep(Rng& rng, McmcState& s);

  // Exact full conditionals of the Gibbs blocks.
  ConditionalNormal beta_conditional(const McmcState& s);
  /// (mean, variance).
  std::pair<double, double> alpha_conditional(const McmcState& s);
  CanonicalForm u_conditional(const McmcState& s);
  /// Untruncated (mean, variance) of y_i given all other sites.
  std::pair<double, double> censored_conditional(const McmcState& s, Index i);
  /// (shape, rate) of the Gamma law of 1/sigma2.
  std::pair<double, double> sigma2_conjugate(const McmcState& s);

  // Unnormalized log full conditionals in natural coordinates.
  double log_target_sigma2(const McmcState& s, double sigma2);
  double log_target_omega2(const McmcState& s, double omega2);
  double log_target_nu(const McmcState& s, double nu);
  double log_target_theta_w(const McmcState& s, double theta);
  double log_target_theta_lambda(const McmcState& s, double theta);
  double log_target_lambda(const McmcState& s, Index i, double lambda_i);

  /// log p(y_J | u, lambda, eta), the exact-site marginal.
  double log_conditional_exact(const McmcState& s);

  void set_adapting(bool on) { adapting_ = on; }
  void reset_acceptance();
  std::map<std::string, double> acceptance_rates() const;
  const ProposalScales& scales() const { return scales_; }

 private:
  struct CorrCache {
    double theta = std::numeric_limits<double>::quiet_NaN();
    Matrix corr;  // jittered
    Eigen::LLT<Matrix> llt;
    Matrix inverse;
    double log_det = 0.0;
    double log_orthant = std::numeric_limits<double>::quiet_NaN();
  };

  struct PrecisionCache {
    bool valid = false;
    double theta_w = 0.0;
    double sigma2 = 0.0;
    double omega2 = 0.0;
    Vector lambda;
    Matrix prec;           // (sigma2 B)^{-1}
    double log_det = 0.0;  // log |sigma2 B|
  };

  struct Adaptive {
    double log_scale = 0.0;
    long tries = 0;
    long accepts = 0;
  };

  void fill_corr(CorrCache& c, double theta, bool want_inverse);
  const CorrCache& corr_w(double theta);
  const CorrCache& corr_lambda(double theta);
  double log_orthant(CorrCache& c);

  /// Precision of y | u, lambda, eta, refreshed if the state moved.
  const PrecisionCache& precision(const McmcState& s);
  void set_precision_from(const McmcState& s, const Eigen::LLT<Matrix>& llt);
  Matrix covariance_y(const Matrix& corr, const Vector& lambda, double sigma2, double omega2) const;

  Vector residual(const McmcState& s) const;
  double gaussian_loglik(const Vector& r, const Eigen::LLT<Matrix>& llt) const;
  double psi_loglik(const Vector& psi, double nu, const CorrCache& c) const;

  bool metropolis(Rng& rng, Adaptive& a, double log_ratio);
  double proposal_sd(const Adaptive& a, double base) const { return base * std::exp(a.log_scale); }

  const SpatialDataset& ds_;
  ChainConfig cfg_;
  Matrix dist_;
  double med_d_ = 1.0;
  std::vector<Index> exact_;
  std::vector<Index> censored_;
  int orthant_points_ = 256;

  CorrCache cw_;
  CorrCache cw_prop_;
  CorrCache cl_;
  CorrCache cl_prop_;
  PrecisionCache pc_;

  ProposalScales scales_;
  bool adapting_ = false;
  long iteration_ = 0;
  Adaptive a_sigma2_, a_omega2_, a_nu_, a_theta_w_, a_theta_lambda_;
  std::vector<Adaptive> a_lambda_;
};

ChainOutput run_chain(const SpatialDataset& ds, const ChainConfig& cfg);
ChainOutput run_chain(Rng& rng, const SpatialDataset& ds, const ChainConfig& cfg);

}  // namespace suglg
