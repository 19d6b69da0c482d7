#pragma once

#include <map>
#include <string>
#include <vector>

#include "suglg/sampler.hpp"

namespace suglg {

struct PredictionResult {
  double x = 0.0;
  double y = 0.0;
  Vector draws;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q50 = 0.0;
  double q975 = 0.0;
};

/// Mean, sd and (2.5, 50, 97.5)% quantiles of `draws`.
PredictionResult summarize_draws(double x, double y, Vector draws);

/// One predictive draw per retained posterior draw at each new location.
///
/// `new_design` holds one design row per new location; it may be omitted
/// for constant-mean datasets. Throws ValidationError if a new location
/// coincides with a site of `ds`.
std::vector<PredictionResult> predict(Rng& rng, const ChainOutput& chain, const SpatialDataset& ds,
                                      const Locations& new_locs, const Matrix* new_design = nullptr);

/// Posterior summaries of the imputed values at the censored sites.
std::vector<PredictionResult> predict_censored(const ChainOutput& chain, const SpatialDataset& ds);

double rmse(const std::vector<PredictionResult>& predictions, const Vector& truth);

struct DicResult {
  double dbar = 0.0;
  double pd = 0.0;
  double dic = 0.0;
};

/// log p(y_J | u, lambda, eta) for the exact sites.
double exact_site_loglik(const SpatialDataset& ds, const ModelParams& p, const Vector& u, const Vector& lambda);

/// Deviance information criterion with the latent-inclusive focus.
DicResult dic(const ChainOutput& chain, const SpatialDataset& ds);

struct LpmlResult {
  double lpml = 0.0;
  Vector log_cpo;  // one entry per exact site
  std::string diagnostic;
};

/// Harmonic-mean CPO estimates from the conditional law of y_i given
/// y_{-i} under each draw.
LpmlResult lpml(const ChainOutput& chain, const SpatialDataset& ds);

/// Per parameter: max over alternates of |mean_alt - mean_bench| / sd_bench.
std::map<std::string, double> sensitivity(const ChainOutput& benchmark, const std::vector<ChainOutput>& alternates);

/// Posterior mean of lambda at each site. Throws KindError for kinds
/// without the mixing field.
Vector outlier_scores(const ChainOutput& chain);

struct ModelScore {
  ModelKind kind = ModelKind::Suglg;
  double dic = 0.0;
  double lpml = 0.0;
  double rmse = std::numeric_limits<double>::quiet_NaN();
};

struct ComparisonReport {
  std::vector<ModelScore> models;
};

/// nx x ny grid over the bounding box of `locs`, minus points that
/// coincide with a site.
Locations prediction_grid(const Locations& locs, int nx, int ny);

}  // namespace suglg
