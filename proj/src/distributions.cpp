#include "suglg/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "suglg/mvn_cdf.hpp"

namespace suglg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::LLT<Matrix> checked_llt(const Matrix& m, const char* what) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success)
    throw FactorizationError(std::string(what) + ": matrix is not positive definite");
  return llt;
}

// Standard normal restricted to (a, b), a >= 0, b > a.
double std_tn_upper(Rng& rng, double a, double b) {
  if (a > 4.0) {
    if (std::isfinite(b) && (b - a) * a < 1.0) {
      // Narrow slab far in the tail: uniform proposal, envelope at x = a.
      for (;;) {
        const double x = a + (b - a) * rng.uniform();
        if (std::log(rng.uniform()) <= 0.5 * (a * a - x * x)) return x;
      }
    }
    // Exponential proposal (Robert 1995) with optimal rate.
    const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
      const double x = a + rng.exponential() / rate;
      if (x >= b) continue;
      const double d = x - rate;
      if (std::log(rng.uniform()) <= -0.5 * d * d) return x;
    }
  }
  const double qa = norm_sf(a);
  const double qb = std::isfinite(b) ? norm_sf(b) : 0.0;
  if (qa - qb > 1e-10 * qa) {
    const double x = norm_quantile_upper(qb + rng.uniform() * (qa - qb));
    return std::clamp(x, a, b);
  }
  for (;;) {
    const double x = a + (b - a) * rng.uniform();
    if (std::log(rng.uniform()) <= 0.5 * (a * a - x * x)) return x;
  }
}

// Standard normal restricted to (a, b).
double std_tn(Rng& rng, double a, double b) {
  if (!(a < b)) throw ArgumentError("truncated normal: empty interval");
  if (b <= 0.0) return -std_tn_upper(rng, -b, -a);
  if (a >= 0.0) return std_tn_upper(rng, a, b);
  // a < 0 < b
  const double mass = norm_cdf(b) - norm_cdf(a);
  if (mass >= 0.3) {
    for (;;) {
      const double z = rng.normal();
      if (z > a && z < b) return z;
    }
  }
  for (;;) {
    const double x = a + (b - a) * rng.uniform();
    if (std::log(rng.uniform()) <= -0.5 * x * x) return x;
  }
}

}  // namespace

// ---------------------------------------------------------------------------

ConditionalNormal mvn_conditional(const Vector& mean, const Matrix& cov,
                                  std::span<const Index> observed_idx,
                                  const Vector& observed_vals) {
  const Index n = mean.size();
  if (cov.rows() != n || cov.cols() != n)
    throw ArgumentError("mvn_conditional: covariance shape mismatch");
  if (observed_idx.empty() || static_cast<Index>(observed_idx.size()) >= n)
    throw ArgumentError("mvn_conditional: observed set must be a proper nonempty subset");
  if (observed_vals.size() != static_cast<Index>(observed_idx.size()))
    throw ArgumentError("mvn_conditional: observed values length mismatch");

  std::vector<bool> is_obs(n, false);
  for (Index i : observed_idx) {
    if (i < 0 || i >= n || is_obs[i]) throw ArgumentError("mvn_conditional: bad observed index");
    is_obs[i] = true;
  }
  std::vector<Index> free_idx;
  for (Index i = 0; i < n; ++i)
    if (!is_obs[i]) free_idx.push_back(i);

  const std::vector<Index> obs(observed_idx.begin(), observed_idx.end());
  const Matrix s_oo = cov(obs, obs);
  const Matrix s_uo = cov(free_idx, obs);
  const Eigen::LLT<Matrix> llt = checked_llt(s_oo, "mvn_conditional");

  const Vector resid = observed_vals - mean(obs);
  ConditionalNormal out;
  out.mean = mean(free_idx) + s_uo * llt.solve(resid);
  out.cov = cov(free_idx, free_idx) - s_uo * llt.solve(s_uo.transpose());
  return out;
}

double tn_interval_sample(Rng& rng, double lo, double hi, double mean, double var) {
  if (!(var > 0.0)) throw ArgumentError("truncated normal: variance must be positive");
  const double sd = std::sqrt(var);
  const double a = std::isfinite(lo) ? (lo - mean) / sd : lo;
  const double b = std::isfinite(hi) ? (hi - mean) / sd : hi;
  const double x = mean + sd * std_tn(rng, a, b);
  // Guard against rounding pushing the value onto a bound.
  if (x <= lo) return std::nextafter(lo, kInf);
  if (x >= hi) return std::nextafter(hi, -kInf);
  return x;
}

double tn1_sample(Rng& rng, double lower, double mean, double var) {
  return tn_interval_sample(rng, lower, kInf, mean, var);
}

double tn1_mean(double lower, double mean, double var) {
  const double sd = std::sqrt(var);
  const double z = (lower - mean) / sd;
  // phi(z) / (1 - Phi(z)) in log space.
  return mean + sd * std::exp(log_norm_pdf(z) - log_norm_cdf(-z));
}

void tmvn_gibbs_canonical(Rng& rng, Vector& x, const Matrix& precision, const Vector& linear,
                          const Vector& lower, const Vector& upper, int sweeps) {
  const Index n = x.size();
  for (int s = 0; s < sweeps; ++s) {
    for (Index i = 0; i < n; ++i) {
      const double q = precision(i, i);
      const double rest = precision.col(i).dot(x) - q * x[i];
      const double mean = (linear[i] - rest) / q;
      x[i] = tn_interval_sample(rng, lower[i], upper[i], mean, 1.0 / q);
    }
  }
}

Vector tmvn_sample(Rng& rng, const Vector& lower, const Vector& mean, const Matrix& cov,
                   int sweeps, const Vector* start) {
  const Index n = mean.size();
  if (lower.size() != n || cov.rows() != n || cov.cols() != n)
    throw ArgumentError("tmvn_sample: dimension mismatch");
  if (sweeps < 1) throw ArgumentError("tmvn_sample: sweeps must be >= 1");

  const Eigen::LLT<Matrix> llt = checked_llt(cov, "tmvn_sample");
  const Matrix precision = llt.solve(Matrix::Identity(n, n));
  const Vector linear = precision * mean;
  const Vector upper = Vector::Constant(n, kInf);

  Vector x(n);
  if (start != nullptr) {
    if (start->size() != n) throw ArgumentError("tmvn_sample: start has wrong length");
    x = *start;
    for (Index i = 0; i < n; ++i)
      if (!(x[i] > lower[i])) throw ArgumentError("tmvn_sample: start violates bounds");
  } else {
    for (Index i = 0; i < n; ++i) x[i] = tn1_sample(rng, lower[i], mean[i], cov(i, i));
  }
  tmvn_gibbs_canonical(rng, x, precision, linear, lower, upper, sweeps);
  return x;
}

Vector tmvn_sample_rejection(Rng& rng, const Vector& lower, const Vector& mean, const Matrix& cov,
                             long max_tries) {
  const Index n = mean.size();
  const Eigen::LLT<Matrix> llt = checked_llt(cov, "tmvn_sample_rejection");
  const Matrix lfac = llt.matrixL();
  Vector z(n);
  for (long t = 0; t < max_tries; ++t) {
    for (Index i = 0; i < n; ++i) z[i] = rng.normal();
    const Vector x = mean + lfac * z;
    if ((x.array() > lower.array()).all()) return x;
  }
  throw NumericalError("tmvn_sample_rejection: no acceptance within max_tries");
}

// ---------------------------------------------------------------------------

void SunParams::validate() const {
  const Index nn = n();
  const Index mm = m();
  if (sigma.rows() != nn || sigma.cols() != nn || gamma.rows() != nn || gamma.cols() != mm ||
      delta.rows() != mm || delta.cols() != mm)
    throw ArgumentError("SunParams: inconsistent dimensions");
  if (!sigma.isApprox(sigma.transpose()) || !delta.isApprox(delta.transpose()))
    throw ArgumentError("SunParams: sigma and delta must be symmetric");
  if ((delta.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12)
    throw ArgumentError("SunParams: delta must have unit diagonal");
  checked_llt(sigma, "SunParams sigma");
  checked_llt(delta, "SunParams delta");
  const Eigen::LLT<Matrix> llt(sigma);
  const Matrix cond = delta - gamma.transpose() * llt.solve(gamma);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(cond, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10)
    throw ArgumentError("SunParams: delta - gamma' sigma^-1 gamma is not positive semidefinite");
}

namespace {

// log Phi_m(x; v, cov)
double log_mvn_cdf(const Vector& x, const Vector& v, const Matrix& cov) {
  if (x.size() == 1) {
    const double var = cov(0, 0);
    if (var <= 0.0) return x[0] >= v[0] ? 0.0 : -kInf;
    return log_norm_cdf((x[0] - v[0]) / std::sqrt(var));
  }
  return std::log(mvn_cdf(x - v, cov));
}

}  // namespace

double sun_logpdf(const Vector& x, const SunParams& params) {
  params.validate();
  if (x.size() != params.n()) throw ArgumentError("sun_logpdf: dimension mismatch");
  const Eigen::LLT<Matrix> llt(params.sigma);
  const double base = mvn_logpdf(x, params.mu, params.sigma);
  const Vector arg = params.gamma.transpose() * llt.solve(x - params.mu);
  const Matrix cond = params.delta - params.gamma.transpose() * llt.solve(params.gamma);
  const Vector zero = Vector::Zero(params.m());
  return base + log_mvn_cdf(arg, params.v, cond) - log_mvn_cdf(zero, params.v, params.delta);
}

Vector sun_sample(Rng& rng, double alpha, double sigma, const Matrix& corr) {
  const Index n = corr.rows();
  const Vector zero = Vector::Zero(n);
  Vector u;
  if (n <= 12) {
    u = tmvn_sample_rejection(rng, zero, zero, corr);
  } else {
    u = tmvn_sample(rng, zero, zero, corr, 200);
  }
  const Eigen::LLT<Matrix> llt = checked_llt(corr, "sun_sample");
  Vector z(n);
  for (Index i = 0; i < n; ++i) z[i] = rng.normal();
  const Vector v = llt.matrixL() * z;
  return alpha * u + sigma * v;
}

// ---------------------------------------------------------------------------
// GIG: algorithms of Hoermann & Leydold (2014), "Generating generalized
// inverse Gaussian random variates", for the two-parameter form
// h(y) = y^(lambda-1) exp{-omega (y + 1/y) / 2}, lambda >= 0.

void GigParams::validate() const {
  if (!(a >= 0.0) || !(b >= 0.0) || !std::isfinite(p) || !std::isfinite(a) || !std::isfinite(b))
    throw ArgumentError("GigParams: a and b must be finite and nonnegative");
  if (a == 0.0 && b == 0.0) throw ArgumentError("GigParams: a and b cannot both be zero");
  if (p <= 0.0 && a == 0.0) throw ArgumentError("GigParams: p <= 0 requires a > 0");
  if (p >= 0.0 && b == 0.0) throw ArgumentError("GigParams: p >= 0 requires b > 0");
}

namespace {

double gig_mode(double lambda, double omega) {
  if (lambda >= 1.0)
    return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

double gig_rou_noshift(Rng& rng, double lambda, double omega) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
  const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
  for (;;) {
    const double u = um * rng.uniform();
    const double v = rng.uniform();
    const double x = u / v;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

double gig_rou_shift(Rng& rng, double lambda, double omega) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

  // Roots of the cubic giving the bounding rectangle.
  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
  const double fi = std::acos(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)));
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;

  const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
  const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

  for (;;) {
    const double u = uminus + rng.uniform() * (uplus - uminus);
    const double v = rng.uniform();
    const double x = u / v + xm;
    if (x <= 0.0) continue;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

// Small omega, 0 <= lambda < 1: piecewise hat of constant / power / exponential.
double gig_small_omega(Rng& rng, double lambda, double omega) {
  const double xm = gig_mode(lambda, omega);
  const double x0 = omega / (1.0 - lambda);
  const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
  const double a0 = k0 * x0;

  double k1;
  double a1;
  double k2;
  double a2;
  if (x0 >= 2.0 / omega) {
    k1 = 0.0;
    a1 = 0.0;
    k2 = std::pow(x0, lambda - 1.0);
    a2 = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
  } else {
    k1 = std::exp(-omega);
    a1 = lambda == 0.0 ? k1 * std::log(2.0 / (omega * omega))
                       : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
    k2 = std::pow(2.0 / omega, lambda - 1.0);
    a2 = k2 * 2.0 * std::exp(-1.0) / omega;
  }
  const double total = a0 + a1 + a2;

  for (;;) {
    double v = total * rng.uniform();
    double x;
    double hx;
    if (v <= a0) {
      x = x0 * v / a0;
      hx = k0;
    } else if (v <= a0 + a1) {
      v -= a0;
      if (lambda == 0.0)
        x = omega * std::exp(std::exp(omega) * v);
      else
        x = std::pow(std::pow(x0, lambda) + lambda / k1 * v, 1.0 / lambda);
      hx = k1 * std::pow(x, lambda - 1.0);
    } else {
      v -= a0 + a1;
      const double start = std::max(x0, 2.0 / omega);
      x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * start) - omega / (2.0 * k2) * v);
      hx = k2 * std::exp(-omega / 2.0 * x);
    }
    const double u = rng.uniform() * hx;
    if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
  }
}

double gig_standard(Rng& rng, double lambda, double omega) {
  if (lambda > 2.0 || omega > 3.0) return gig_rou_shift(rng, lambda, omega);
  if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) return gig_rou_noshift(rng, lambda, omega);
  return gig_small_omega(rng, lambda, omega);
}

double log_bessel_k(double nu, double z) {
  nu = std::abs(nu);
  if (z < 500.0) {
    const double k = std::cyl_bessel_k(nu, z);
    if (k > 0.0 && std::isfinite(k)) return std::log(k);
  }
  // Large-argument expansion.
  const double mu = 4.0 * nu * nu;
  const double series = 1.0 + (mu - 1.0) / (8.0 * z) + (mu - 1.0) * (mu - 9.0) / (128.0 * z * z);
  return 0.5 * std::log(std::numbers::pi / (2.0 * z)) - z + std::log(series);
}

}  // namespace

double gig_sample(Rng& rng, const GigParams& params) {
  params.validate();
  const auto [p, a, b] = params;
  if (a == 0.0) return 2.0 * rng.gamma(p) / (b * b);
  if (b == 0.0) return 0.5 * a * a / rng.gamma(-p);
  const double omega = a * b;
  const double eta = a / b;
  if (p >= 0.0) return eta * gig_standard(rng, p, omega);
  return eta / gig_standard(rng, -p, omega);
}

double gig_logpdf(double x, const GigParams& params) {
  params.validate();
  if (!(x > 0.0)) return -kInf;
  const auto [p, a, b] = params;
  if (a == 0.0) {
    const double rate = 0.5 * b * b;
    return p * std::log(rate) - std::lgamma(p) + (p - 1.0) * std::log(x) - rate * x;
  }
  if (b == 0.0) {
    const double shape = -p;
    const double scale = 0.5 * a * a;
    return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
  }
  const double log_norm = std::log(2.0) + p * std::log(a / b) + log_bessel_k(p, a * b);
  return (p - 1.0) * std::log(x) - 0.5 * (a * a / x + b * b * x) - log_norm;
}

double gig_mean(const GigParams& params) {
  params.validate();
  const auto [p, a, b] = params;
  if (a == 0.0) return 2.0 * p / (b * b);
  if (b == 0.0) {
    if (-p <= 1.0) return kInf;
    return 0.5 * a * a / (-p - 1.0);
  }
  return (a / b) * std::exp(log_bessel_k(p + 1.0, a * b) - log_bessel_k(p, a * b));
}

}  // namespace suglg
