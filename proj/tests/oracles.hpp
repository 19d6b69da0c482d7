#pragma once

// Independent reference implementations used only by tests. Nothing here
// calls into the library's density code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "suglg/model.hpp"
#include "suglg/sampler.hpp"

namespace oracle {

using suglg::Index;
using suglg::Matrix;
using suglg::Vector;

inline double dense_mvn_logpdf(const Vector& x, const Vector& mean, const Matrix& cov) {
  const Vector r = x - mean;
  const double quad = r.dot(cov.inverse() * r);
  return -0.5 * (static_cast<double>(x.size()) * std::log(2.0 * std::numbers::pi) + std::log(cov.determinant()) + quad);
}

inline Matrix exp_corr(const Matrix& coords, double theta) {
  const Index n = coords.rows();
  Matrix c(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) c(i, j) = std::exp(-(coords.row(i) - coords.row(j)).norm() / theta);
  return c;
}

/// P(X > 0) for X ~ N(0, corr), closed form for n <= 3.
inline double orthant(const Matrix& corr) {
  const double pi = std::numbers::pi;
  switch (corr.rows()) {
    case 1: return 0.5;
    case 2: return 0.25 + std::asin(corr(0, 1)) / (2.0 * pi);
    case 3: return 0.125 + (std::asin(corr(0, 1)) + std::asin(corr(0, 2)) + std::asin(corr(1, 2))) / (4.0 * pi);
    default: throw std::logic_error("orthant oracle supports n <= 3");
  }
}

inline double log_gig_kernel(double x, double a, double b) { return -std::log(x) - 0.5 * (a * a / x + b * b * x); }

/// Unnormalized log joint of (y, u, lambda, eta) written out from the model
/// definition with dense inverses.
inline double log_joint(const suglg::SpatialDataset& ds, const Vector& y, const Vector& u, const Vector& lambda,
                        const suglg::ModelParams& p, const suglg::Hyperparams& h, double med_d,
                        suglg::ModelKind kind) {
  const Index n = ds.size();
  const Matrix cw = exp_corr(ds.coords, p.theta_w);
  Vector s(n);
  for (Index i = 0; i < n; ++i) s[i] = 1.0 / std::sqrt(lambda[i]);
  Matrix b = s.asDiagonal() * cw * s.asDiagonal();
  b.diagonal().array() += p.omega2;
  const double alpha = suglg::is_skew(kind) ? p.alpha : 0.0;
  Vector mean = ds.design * p.beta;
  if (suglg::is_skew(kind)) mean += alpha * s.cwiseProduct(u);
  double lj = dense_mvn_logpdf(y, mean, p.sigma2 * b);
  if (suglg::is_skew(kind)) lj += dense_mvn_logpdf(u, Vector::Zero(n), cw) - std::log(orthant(cw));
  if (suglg::is_mixture(kind)) {
    const Vector psi = lambda.array().log();
    lj += dense_mvn_logpdf(psi, Vector::Constant(n, -0.5 * p.nu), p.nu * exp_corr(ds.coords, p.theta_lambda)) -
          psi.sum();
  }
  lj += -0.5 * p.beta.squaredNorm() / h.c0;
  if (suglg::is_skew(kind)) lj += -0.5 * p.alpha * p.alpha / h.c1;
  lj += -(h.c2 + 1.0) * std::log(p.sigma2) - h.c3 / p.sigma2;
  lj += log_gig_kernel(p.omega2, h.c4, h.c5);
  lj += -h.c8 * p.theta_w / med_d;
  if (suglg::is_mixture(kind)) {
    lj += log_gig_kernel(p.nu, h.c6, h.c7);
    lj += -h.c9 * p.theta_lambda / med_d;
  }
  return lj;
}

/// A normalized density tabulated on an equispaced grid with its CDF.
struct GridDensity {
  Vector x;
  Vector pdf;
  Vector cdf;
  /// max(pdf at either end) / max(pdf); small when the range covers the mass.
  double pdf_edge_ratio = 0.0;

  double cdf_at(double t) const {
    if (t <= x[0]) return 0.0;
    if (t >= x[x.size() - 1]) return 1.0;
    const double h = x[1] - x[0];
    const Index k = static_cast<Index>((t - x[0]) / h);
    const double w = (t - x[k]) / h;
    return (1.0 - w) * cdf[k] + w * cdf[k + 1];
  }
};

/// Tabulates exp(logf) on [lo, hi] and normalizes by the trapezoid rule.
/// Requires the density to be negligible at both ends.
inline GridDensity grid_normalize(const std::function<double(double)>& logf, double lo, double hi,
                                  Index points = 20001) {
  GridDensity g;
  g.x = Vector::LinSpaced(points, lo, hi);
  Vector lf(points);
  for (Index i = 0; i < points; ++i) lf[i] = logf(g.x[i]);
  const double top = lf.maxCoeff();
  g.pdf = (lf.array() - top).exp();
  const double h = g.x[1] - g.x[0];
  g.cdf.resize(points);
  g.cdf[0] = 0.0;
  for (Index i = 1; i < points; ++i) g.cdf[i] = g.cdf[i - 1] + 0.5 * h * (g.pdf[i - 1] + g.pdf[i]);
  const double z = g.cdf[points - 1];
  g.pdf /= z;
  g.cdf /= z;
  g.pdf_edge_ratio = std::max(g.pdf[0], g.pdf[points - 1]) / g.pdf.maxCoeff();
  return g;
}

/// sup_t |F_n(t) - F(t)| over the sample points.
inline double ks_distance(std::vector<double> sample, const GridDensity& g) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = g.cdf_at(sample[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  return d;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  double se = 0.0;
};

inline Moments moments(const std::vector<double>& v) {
  Moments m;
  const double n = static_cast<double>(v.size());
  for (double x : v) m.mean += x;
  m.mean /= n;
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= n - 1.0;
  m.se = std::sqrt(m.var / n);
  return m;
}

}  // namespace oracle
