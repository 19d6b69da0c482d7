#include "suglg/model.hpp"

#include <algorithm>
#include <cctype>
#include <numbers>
#include <numeric>

#include "suglg/distributions.hpp"

namespace suglg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

ModelKind parse_model_kind(std::string_view name) {
  std::string up(name);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "GAUS") return ModelKind::Gaus;
  if (up == "SUG") return ModelKind::Sug;
  if (up == "GLG") return ModelKind::Glg;
  if (up == "SUGLG") return ModelKind::Suglg;
  throw ArgumentError("unknown model kind '" + std::string(name) + "' (expected GAUS, SUG, GLG or SUGLG)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Gaus: return "GAUS";
    case ModelKind::Sug: return "SUG";
    case ModelKind::Glg: return "GLG";
    case ModelKind::Suglg: return "SUGLG";
  }
  return "?";
}

std::vector<Index> SpatialDataset::exact_indices() const {
  std::vector<Index> out;
  for (Index i = 0; i < size(); ++i)
    if (!is_censored(i)) out.push_back(i);
  return out;
}

std::vector<Index> SpatialDataset::censored_indices() const {
  std::vector<Index> out;
  for (Index i = 0; i < size(); ++i)
    if (is_censored(i)) out.push_back(i);
  return out;
}

void SpatialDataset::validate() const {
  const Index n = size();
  if (n < 1) throw ValidationError("dataset has no sites");
  if (design.rows() != n || values.size() != n || static_cast<Index>(intervals.size()) != n)
    throw ValidationError("dataset fields disagree on the number of sites");
  if (design.cols() < 1) throw ValidationError("design matrix has no columns");
  if (!ids.empty() && static_cast<Index>(ids.size()) != n)
    throw ValidationError("dataset ids disagree on the number of sites");
  Index exact = 0;
  for (Index i = 0; i < n; ++i) {
    if (is_censored(i)) {
      if (!(intervals[i].lo < intervals[i].hi))
        throw ValidationError("site " + std::to_string(i) + ": censoring interval has lo >= hi");
    } else {
      if (!std::isfinite(values[i])) throw ValidationError("site " + std::to_string(i) + ": value is not finite");
      ++exact;
    }
  }
  if (exact == 0) throw ValidationError("dataset needs at least one exact observation");
  if (n >= 2) distance_matrix(coords);
}

SpatialDataset make_exact_dataset(const Locations& coords, const Vector& values) {
  SpatialDataset ds;
  ds.coords = coords;
  ds.design = Matrix::Ones(coords.rows(), 1);
  ds.values = values;
  ds.intervals.assign(coords.rows(), CensorInterval{});
  for (Index i = 0; i < coords.rows(); ++i) ds.ids.push_back(std::to_string(i + 1));
  return ds;
}

void Hyperparams::validate() const {
  for (double c : {c0, c1, c2, c3, c4, c5, c6, c7, c8, c9})
    if (!(c > 0.0) || !std::isfinite(c)) throw ArgumentError("hyperparameters must be positive and finite");
}

double log_prior_sigma2(double sigma2, double c2, double c3) {
  if (!(sigma2 > 0.0)) return -kInf;
  // sigma^-2 ~ Gamma(c2, rate c3), pushed through x -> 1/x.
  return c2 * std::log(c3) - std::lgamma(c2) - (c2 + 1.0) * std::log(sigma2) - c3 / sigma2;
}

double log_prior_omega2(double omega2, double c4, double c5) {
  if (!(omega2 > 0.0)) return -kInf;
  return gig_logpdf(omega2, GigParams{0.0, c4, c5});
}

double log_prior_theta(double theta, double c, double med_d) {
  if (!(theta > 0.0)) return -kInf;
  const double rate = c / med_d;
  return std::log(rate) - rate * theta;
}

double log_prior(const ModelParams& params, const Hyperparams& hyper, double med_d, ModelKind kind) {
  if (!(med_d > 0.0)) throw ArgumentError("log_prior: median distance must be positive");
  const Index k = params.beta.size();
  double lp = -0.5 * params.beta.squaredNorm() / hyper.c0 - 0.5 * k * std::log(2.0 * std::numbers::pi * hyper.c0);
  if (is_skew(kind))
    lp += -0.5 * params.alpha * params.alpha / hyper.c1 - 0.5 * std::log(2.0 * std::numbers::pi * hyper.c1);
  lp += log_prior_sigma2(params.sigma2, hyper.c2, hyper.c3);
  lp += log_prior_omega2(params.omega2, hyper.c4, hyper.c5);
  lp += log_prior_theta(params.theta_w, hyper.c8, med_d);
  if (is_mixture(kind)) {
    lp += params.nu > 0.0 ? gig_logpdf(params.nu, GigParams{0.0, hyper.c6, hyper.c7}) : -kInf;
    lp += log_prior_theta(params.theta_lambda, hyper.c9, med_d);
  }
  return std::isnan(lp) ? -kInf : lp;
}

double conditional_loglik(const Vector& y, const Vector& u, const Vector& lambda,
                          const ModelParams& params, const SpatialDataset& ds, const Matrix& corr_w) {
  const Index n = ds.size();
  if (y.size() != n || u.size() != n || lambda.size() != n)
    throw ArgumentError("conditional_loglik: vector lengths must match the dataset");
  Matrix corr = corr_w;
  corr.diagonal().array() += kDiagonalJitter;
  const Matrix cov = params.sigma2 * build_b_matrix(corr, lambda, params.omega2);
  const Vector mean = ds.design * params.beta + params.alpha * u.cwiseProduct(lambda.cwiseSqrt().cwiseInverse());
  return mvn_logpdf(y, mean, cov);
}

double conditional_loglik(const Vector& y, const Vector& u, const Vector& lambda,
                          const ModelParams& params, const SpatialDataset& ds) {
  const Matrix corr = ds.size() >= 2 ? exp_correlation(distance_matrix(ds.coords), {params.theta_w})
                                     : Matrix::Ones(1, 1);
  return conditional_loglik(y, u, lambda, params, ds, corr);
}

double lambda_field_logpdf(const Vector& lambda, double nu, const Matrix& corr_lambda) {
  if (!(nu > 0.0)) throw ArgumentError("lambda_field_logpdf: nu must be positive");
  if (!(lambda.array() > 0.0).all()) throw ArgumentError("lambda_field_logpdf: lambda must be positive");
  const Index n = lambda.size();
  const Vector psi = lambda.array().log();
  Matrix cov = nu * corr_lambda;
  cov.diagonal().array() += nu * kDiagonalJitter;
  return mvn_logpdf(psi, Vector::Constant(n, -0.5 * nu), cov) - psi.sum();
}

SimulationResult simulate_dataset(Rng& rng, const Locations& locs, const Matrix& design,
                                  const ModelParams& truth, ModelKind kind) {
  const Index n = locs.rows();
  if (design.rows() != n || design.cols() != truth.beta.size())
    throw ArgumentError("simulate_dataset: design does not match locations or beta");
  const Matrix dist = n >= 2 ? distance_matrix(locs) : Matrix::Zero(1, 1);

  LatentRecord lat;
  lat.lambda = Vector::Ones(n);
  if (is_mixture(kind)) {
    const Matrix corr_l = exp_correlation(dist, {truth.theta_lambda});
    const auto llt = factorize_jittered(corr_l, "simulate_dataset lambda field");
    Vector z(n);
    for (Index i = 0; i < n; ++i) z[i] = rng.normal();
    const Vector psi = Vector::Constant(n, -0.5 * truth.nu) + std::sqrt(truth.nu) * Vector(llt.matrixL() * z);
    lat.lambda = psi.array().exp();
  }

  const Matrix corr_w = exp_correlation(dist, {truth.theta_w});
  Matrix corr_wj = corr_w;
  corr_wj.diagonal().array() += kDiagonalJitter;
  const auto llt_w = factorize(corr_wj, "simulate_dataset");
  lat.u = Vector::Zero(n);
  if (is_skew(kind)) {
    const Vector zero = Vector::Zero(n);
    lat.u = n <= 12 ? tmvn_sample_rejection(rng, zero, zero, corr_wj) : tmvn_sample(rng, zero, zero, corr_wj, 500);
  }
  Vector z(n);
  for (Index i = 0; i < n; ++i) z[i] = rng.normal();
  lat.v = llt_w.matrixL() * z;
  lat.rho.resize(n);
  for (Index i = 0; i < n; ++i) lat.rho[i] = rng.normal();

  const double alpha = is_skew(kind) ? truth.alpha : 0.0;
  const Vector scale = lat.lambda.array().rsqrt();
  lat.y = design * truth.beta +
          scale.cwiseProduct(alpha * lat.u + std::sqrt(truth.sigma2) * lat.v) +
          std::sqrt(truth.tau2()) * lat.rho;

  SimulationResult out;
  out.dataset = make_exact_dataset(locs, lat.y);
  out.dataset.design = design;
  out.latent = std::move(lat);
  return out;
}

SpatialDataset apply_left_censoring(const SpatialDataset& ds, Index count) {
  const std::vector<Index> exact = ds.exact_indices();
  if (count < 0) throw ArgumentError("apply_left_censoring: count must be nonnegative");
  if (count >= static_cast<Index>(exact.size()))
    throw ArgumentError("apply_left_censoring: count " + std::to_string(count) +
                        " would leave no exact observation");
  SpatialDataset out = ds;
  if (count == 0) return out;
  std::vector<Index> order = exact;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return ds.values[a] < ds.values[b]; });
  const double limit = ds.values[order[count - 1]];
  for (Index r = 0; r < count; ++r) {
    const Index i = order[r];
    out.values[i] = std::numeric_limits<double>::quiet_NaN();
    out.intervals[i] = CensorInterval{-kInf, limit};
  }
  return out;
}

SpatialDataset inject_outliers(const SpatialDataset& ds, std::span<const Index> indices, double shift) {
  SpatialDataset out = ds;
  for (Index i : indices) {
    if (i < 0 || i >= ds.size()) throw ArgumentError("inject_outliers: index " + std::to_string(i) + " out of range");
    if (ds.is_censored(i))
      throw ArgumentError("inject_outliers: site " + std::to_string(i) + " is censored");
    out.values[i] += shift;
  }
  return out;
}

ModelParams sample_prior(Rng& rng, const Hyperparams& hyper, double med_d, ModelKind kind, Index k) {
  ModelParams p;
  p.beta.resize(k);
  for (Index j = 0; j < k; ++j) p.beta[j] = std::sqrt(hyper.c0) * rng.normal();
  p.alpha = is_skew(kind) ? std::sqrt(hyper.c1) * rng.normal() : 0.0;
  p.sigma2 = hyper.c3 / rng.gamma(hyper.c2);
  p.omega2 = gig_sample(rng, GigParams{0.0, hyper.c4, hyper.c5});
  p.theta_w = rng.exponential() * med_d / hyper.c8;
  if (is_mixture(kind)) {
    p.nu = gig_sample(rng, GigParams{0.0, hyper.c6, hyper.c7});
    p.theta_lambda = rng.exponential() * med_d / hyper.c9;
  }
  return restrict_to_kind(p, kind);
}

ModelParams restrict_to_kind(ModelParams params, ModelKind kind) {
  if (!is_skew(kind)) params.alpha = 0.0;
  return params;
}

Locations design97_locations(std::uint64_t seed) {
  constexpr int kCells = 10;
  constexpr double kCell = 5.0;
  Rng rng(seed);
  std::vector<int> cells(kCells * kCells);
  std::iota(cells.begin(), cells.end(), 0);
  // Partial Fisher-Yates picks the three empty cells.
  for (int i = 0; i < 3; ++i) {
    const int j = i + static_cast<int>(rng.uniform() * (cells.size() - i));
    std::swap(cells[i], cells[j]);
  }
  std::vector<bool> dropped(cells.size(), false);
  for (int i = 0; i < 3; ++i) dropped[cells[i]] = true;

  Locations locs(kCells * kCells - 3, 2);
  Index row = 0;
  for (int c = 0; c < kCells * kCells; ++c) {
    const double jx = rng.uniform();
    const double jy = rng.uniform();
    if (dropped[c]) continue;
    const int gx = c % kCells;
    const int gy = c / kCells;
    locs(row, 0) = kCell * (gx + 0.1 + 0.8 * jx);
    locs(row, 1) = kCell * (gy + 0.1 + 0.8 * jy);
    ++row;
  }
  return locs;
}

Locations holdout_lattice() {
  constexpr double xs[] = {12.0, 21.0, 28.0, 40.0};
  constexpr double ys[] = {10.0, 20.0, 30.0, 40.0};
  Locations locs(16, 2);
  Index r = 0;
  for (double x : xs)
    for (double y : ys) {
      locs(r, 0) = x;
      locs(r, 1) = y;
      ++r;
    }
  return locs;
}

ModelParams design_truth() {
  ModelParams p;
  p.beta = Vector::Zero(1);
  p.alpha = 3.0;
  p.sigma2 = 1.0;
  p.omega2 = 0.1;
  p.theta_w = 0.5;
  p.theta_lambda = 0.5;
  p.nu = 1.0;
  return p;
}

DesignRealization simulate_design(Rng& rng, ModelKind kind, Index censor_count, double outlier_shift) {
  const Locations sites = design97_locations();
  const Locations hold = holdout_lattice();
  const Index n = sites.rows();
  Locations all(n + hold.rows(), 2);
  all << sites, hold;
  const SimulationResult sim = simulate_dataset(rng, all, Matrix::Ones(all.rows(), 1), design_truth(), kind);

  DesignRealization out;
  SpatialDataset& ds = out.dataset;
  ds.coords = sim.dataset.coords.topRows(n);
  ds.design = sim.dataset.design.topRows(n);
  ds.values = sim.dataset.values.head(n);
  ds.intervals.assign(sim.dataset.intervals.begin(), sim.dataset.intervals.begin() + n);
  ds.ids.assign(sim.dataset.ids.begin(), sim.dataset.ids.begin() + n);
  if (outlier_shift != 0.0) ds = inject_outliers(ds, kOutlierSites, outlier_shift);
  if (censor_count > 0) ds = apply_left_censoring(ds, censor_count);

  out.latent.lambda = sim.latent.lambda.head(n);
  out.latent.u = sim.latent.u.head(n);
  out.latent.v = sim.latent.v.head(n);
  out.latent.rho = sim.latent.rho.head(n);
  out.latent.y = sim.latent.y.head(n);
  out.holdout = hold;
  out.holdout_values = sim.latent.y.tail(hold.rows());
  return out;
}

}  // namespace suglg
