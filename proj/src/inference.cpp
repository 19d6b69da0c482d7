#include "suglg/inference.hpp"

#include <algorithm>
#include <cmath>

namespace suglg {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double quantile_sorted(const std::vector<double>& v, double q) {
  if (v.size() == 1) return v.front();
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Matrix jittered_corr(const Matrix& dist, double theta) {
  Matrix c = exp_correlation(dist, {theta});
  c.diagonal().array() += kDiagonalJitter;
  return c;
}

Matrix site_distances(const SpatialDataset& ds) {
  return ds.size() >= 2 ? distance_matrix(ds.coords) : Matrix::Zero(1, 1);
}

}  // namespace

PredictionResult summarize_draws(double x, double y, Vector draws) {
  if (draws.size() == 0) throw InsufficientSampleError("summarize_draws: no draws");
  PredictionResult r;
  r.x = x;
  r.y = y;
  r.mean = draws.mean();
  const double ss = (draws.array() - r.mean).square().sum();
  r.sd = draws.size() > 1 ? std::sqrt(ss / static_cast<double>(draws.size() - 1)) : 0.0;
  std::vector<double> sorted(draws.data(), draws.data() + draws.size());
  std::sort(sorted.begin(), sorted.end());
  r.q025 = quantile_sorted(sorted, 0.025);
  r.q50 = quantile_sorted(sorted, 0.5);
  r.q975 = quantile_sorted(sorted, 0.975);
  r.draws = std::move(draws);
  return r;
}

std::vector<PredictionResult> predict(Rng& rng, const ChainOutput& chain, const SpatialDataset& ds,
                                      const Locations& new_locs, const Matrix* new_design) {
  const Index n = ds.size();
  const Index m = new_locs.rows();
  const Index k = ds.design.cols();
  if (chain.size() == 0) throw InsufficientSampleError("predict: chain has no draws");
  if (chain.lambda.cols() != n) throw ArgumentError("predict: chain does not match the dataset");
  Matrix x0;
  if (new_design != nullptr) {
    if (new_design->rows() != m || new_design->cols() != k)
      throw ArgumentError("predict: new design must have one row per location and k columns");
    x0 = *new_design;
  } else {
    if (k != 1 || !(ds.design.array() == 1.0).all())
      throw ArgumentError("predict: new design rows are required for a non-constant mean");
    x0 = Matrix::Ones(m, 1);
  }

  const Matrix cross = cross_distance(ds.coords, new_locs);  // n x m
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < m; ++j)
      if (cross(i, j) == 0.0)
        throw ValidationError("predict: new location " + std::to_string(j) + " coincides with site " +
                              std::to_string(i));
  const Matrix dist = site_distances(ds);
  const bool mixture = is_mixture(chain.kind);
  const bool skew = is_skew(chain.kind);

  Matrix draws(m, chain.size());
  for (Index d = 0; d < chain.size(); ++d) {
    const ModelParams& p = chain.params[d];
    const Vector lambda = chain.lambda.row(d).transpose();
    const Vector u = chain.u.row(d).transpose();
    const Vector y = chain.completed_y(d, ds);
    const Vector dvec = lambda.array().rsqrt();

    Vector d0 = Vector::Ones(m);
    if (mixture) {
      const Matrix cl = jittered_corr(dist, p.theta_lambda);
      const auto llt = factorize(cl, "predict lambda field");
      const Matrix c0 = (-cross.array() / p.theta_lambda).exp().matrix();
      const Vector psi = lambda.array().log();
      const Vector dev = psi.array() + 0.5 * p.nu;
      const Vector w = llt.solve(dev);
      const Matrix sc = llt.matrixL().solve(c0);
      for (Index j = 0; j < m; ++j) {
        const double mean = -0.5 * p.nu + c0.col(j).dot(w);
        const double var = std::max(p.nu * (1.0 + kDiagonalJitter - sc.col(j).squaredNorm()), 1e-300);
        const double psi0 = mean + std::sqrt(var) * rng.normal();
        d0[j] = std::exp(-0.5 * psi0);
      }
    }

    const Matrix cw = jittered_corr(dist, p.theta_w);
    const Matrix cw0 = (-cross.array() / p.theta_w).exp().matrix();
    Vector u0 = Vector::Zero(m);
    if (skew) {
      const auto llt_c = factorize(cw, "predict latent field");
      const Vector w = llt_c.solve(u);
      const Matrix sc = llt_c.matrixL().solve(cw0);
      for (Index j = 0; j < m; ++j) {
        const double mean = cw0.col(j).dot(w);
        const double var = std::max(1.0 + kDiagonalJitter - sc.col(j).squaredNorm(), 1e-300);
        u0[j] = tn1_sample(rng, 0.0, mean, var);
      }
    }

    const Matrix cov = p.sigma2 * build_b_matrix(cw, lambda, p.omega2);
    const auto llt_y = factorize(cov, "predict covariance");
    const Vector b = y - ds.design * p.beta - p.alpha * u.cwiseProduct(dvec);
    const Vector sb = llt_y.solve(b);
    const Matrix g = dvec.asDiagonal() * cw0;  // Lambda^{-1/2} c0, n x m
    const Matrix lg = llt_y.matrixL().solve(g);
    for (Index j = 0; j < m; ++j) {
      const double dj = d0[j];
      const double mean = x0.row(j).dot(p.beta) + p.alpha * dj * u0[j] + p.sigma2 * dj * g.col(j).dot(sb);
      const double var = p.sigma2 * dj * dj * (1.0 + kDiagonalJitter) + p.tau2() -
                         p.sigma2 * p.sigma2 * dj * dj * lg.col(j).squaredNorm();
      draws(j, d) = mean + std::sqrt(std::max(var, 0.0)) * rng.normal();
    }
  }

  std::vector<PredictionResult> out;
  out.reserve(m);
  for (Index j = 0; j < m; ++j) out.push_back(summarize_draws(new_locs(j, 0), new_locs(j, 1), draws.row(j).transpose()));
  return out;
}

std::vector<PredictionResult> predict_censored(const ChainOutput& chain, const SpatialDataset& ds) {
  std::vector<PredictionResult> out;
  for (std::size_t j = 0; j < chain.censored.size(); ++j) {
    const Index i = chain.censored[j];
    out.push_back(summarize_draws(ds.coords(i, 0), ds.coords(i, 1), chain.y_imputed.col(static_cast<Index>(j))));
  }
  return out;
}

double rmse(const std::vector<PredictionResult>& predictions, const Vector& truth) {
  if (static_cast<Index>(predictions.size()) != truth.size())
    throw ArgumentError("rmse: " + std::to_string(truth.size()) + " hold-out values but " +
                        std::to_string(predictions.size()) + " predictions");
  if (predictions.empty()) throw ArgumentError("rmse: no hold-out sites");
  double ss = 0.0;
  for (std::size_t j = 0; j < predictions.size(); ++j) {
    const double e = predictions[j].mean - truth[static_cast<Index>(j)];
    ss += e * e;
  }
  return std::sqrt(ss / static_cast<double>(predictions.size()));
}

double exact_site_loglik(const SpatialDataset& ds, const ModelParams& p, const Vector& u, const Vector& lambda) {
  const std::vector<Index> exact = ds.exact_indices();
  const Matrix cw = jittered_corr(site_distances(ds), p.theta_w);
  const Matrix cov = p.sigma2 * build_b_matrix(cw, lambda, p.omega2);
  const auto llt = factorize(cov(exact, exact), "exact-site covariance");
  const Vector mean = ds.design * p.beta + p.alpha * u.cwiseProduct(lambda.cwiseSqrt().cwiseInverse());
  const Vector r = ds.values(exact) - mean(exact);
  const Vector z = llt.matrixL().solve(r);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (z.squaredNorm() + log_det + static_cast<double>(r.size()) * kLog2Pi);
}

DicResult dic(const ChainOutput& chain, const SpatialDataset& ds) {
  const Index draws = chain.size();
  if (draws < 10) throw InsufficientSampleError("dic: need at least 10 retained draws, have " + std::to_string(draws));
  ModelParams mean = chain.params.front();
  mean.beta.setZero();
  mean.alpha = mean.sigma2 = mean.omega2 = mean.nu = mean.theta_w = mean.theta_lambda = 0.0;
  for (const auto& p : chain.params) {
    mean.beta += p.beta;
    mean.alpha += p.alpha;
    mean.sigma2 += p.sigma2;
    mean.omega2 += p.omega2;
    mean.nu += p.nu;
    mean.theta_w += p.theta_w;
    mean.theta_lambda += p.theta_lambda;
  }
  const double l = static_cast<double>(draws);
  mean.beta /= l;
  mean.alpha /= l;
  mean.sigma2 /= l;
  mean.omega2 /= l;
  mean.nu /= l;
  mean.theta_w /= l;
  mean.theta_lambda /= l;
  const Vector u_bar = chain.u.colwise().mean().transpose();
  const Vector lambda_bar = chain.lambda.colwise().mean().transpose();

  DicResult r;
  r.dbar = -2.0 * chain.log_conditional.mean();
  const double d_hat = -2.0 * exact_site_loglik(ds, mean, u_bar, lambda_bar);
  r.pd = r.dbar - d_hat;
  r.dic = r.dbar + r.pd;
  return r;
}

LpmlResult lpml(const ChainOutput& chain, const SpatialDataset& ds) {
  const Index draws = chain.size();
  if (draws < 1) throw InsufficientSampleError("lpml: chain has no draws");
  const std::vector<Index> exact = ds.exact_indices();
  const Index m = static_cast<Index>(exact.size());
  const Matrix dist = site_distances(ds);

  // neg(j, d) = -log p(y_j | y_{-j}, draw d)
  Matrix neg(m, draws);
  for (Index d = 0; d < draws; ++d) {
    const ModelParams& p = chain.params[d];
    const Vector lambda = chain.lambda.row(d).transpose();
    const Vector u = chain.u.row(d).transpose();
    const Vector y = chain.completed_y(d, ds);
    const Matrix cov = p.sigma2 * build_b_matrix(jittered_corr(dist, p.theta_w), lambda, p.omega2);
    const auto llt = factorize(cov, "lpml covariance");
    const Matrix prec = llt.solve(Matrix::Identity(ds.size(), ds.size()));
    const Vector r = y - ds.design * p.beta - p.alpha * u.cwiseProduct(lambda.cwiseSqrt().cwiseInverse());
    const Vector pr = prec * r;
    for (Index j = 0; j < m; ++j) {
      const Index i = exact[j];
      const double q = prec(i, i);
      const double z = pr[i] / q;  // y_i minus its conditional mean
      neg(j, d) = 0.5 * (kLog2Pi - std::log(q) + z * z * q);
    }
  }

  LpmlResult res;
  res.log_cpo.resize(m);
  for (Index j = 0; j < m; ++j) {
    const double mx = neg.row(j).maxCoeff();
    const double lse = mx + std::log((neg.row(j).array() - mx).exp().sum());
    res.log_cpo[j] = -(lse - std::log(static_cast<double>(draws)));
    if (!std::isfinite(res.log_cpo[j]) && res.diagnostic.empty())
      res.diagnostic = "site " + std::to_string(exact[j]) + ": conditional density underflowed to zero";
  }
  res.lpml = res.diagnostic.empty() ? res.log_cpo.sum() : -std::numeric_limits<double>::infinity();
  return res;
}

std::map<std::string, double> sensitivity(const ChainOutput& benchmark, const std::vector<ChainOutput>& alternates) {
  if (benchmark.size() < 2) throw InsufficientSampleError("sensitivity: benchmark chain needs at least two draws");
  const Index k = benchmark.params.front().beta.size();
  const auto names = parameter_names(benchmark.kind, k);
  const Matrix bench = parameter_table(benchmark);
  const Vector mean = bench.colwise().mean();
  const Vector sd = ((bench.rowwise() - mean.transpose()).colwise().squaredNorm() / (bench.rows() - 1.0)).cwiseSqrt();

  std::map<std::string, double> out;
  for (Index c = 0; c < static_cast<Index>(names.size()); ++c) {
    if (!(sd[c] > 0.0)) throw ArgumentError("sensitivity: benchmark sd of " + names[c] + " is zero");
    out[names[c]] = 0.0;
  }
  for (const auto& alt : alternates) {
    if (alt.kind != benchmark.kind) throw KindError("sensitivity: alternate chain has a different model kind");
    if (alt.size() < 1) throw InsufficientSampleError("sensitivity: empty alternate chain");
    const Vector alt_mean = parameter_table(alt).colwise().mean();
    for (Index c = 0; c < static_cast<Index>(names.size()); ++c)
      out[names[c]] = std::max(out[names[c]], std::abs(alt_mean[c] - mean[c]) / sd[c]);
  }
  return out;
}

Vector outlier_scores(const ChainOutput& chain) {
  if (!is_mixture(chain.kind)) throw KindError("outlier_scores: " + to_string(chain.kind) + " has no mixing field");
  if (chain.size() == 0) throw InsufficientSampleError("outlier_scores: chain has no draws");
  return chain.lambda.colwise().mean().transpose();
}

Locations prediction_grid(const Locations& locs, int nx, int ny) {
  if (nx < 2 || ny < 2) throw ArgumentError("prediction_grid: need at least 2 points per axis");
  const double x0 = locs.col(0).minCoeff(), x1 = locs.col(0).maxCoeff();
  const double y0 = locs.col(1).minCoeff(), y1 = locs.col(1).maxCoeff();
  std::vector<std::pair<double, double>> pts;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const double x = x0 + (x1 - x0) * i / (nx - 1.0);
      const double y = y0 + (y1 - y0) * j / (ny - 1.0);
      bool clash = false;
      for (Index s = 0; s < locs.rows() && !clash; ++s) clash = locs(s, 0) == x && locs(s, 1) == y;
      if (!clash) pts.emplace_back(x, y);
    }
  Locations g(static_cast<Index>(pts.size()), 2);
  for (Index r = 0; r < g.rows(); ++r) {
    g(r, 0) = pts[r].first;
    g(r, 1) = pts[r].second;
  }
  return g;
}

}  // namespace suglg
