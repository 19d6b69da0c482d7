#include "suglg/mvn_cdf.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "suglg/normal.hpp"
#include "suglg/rng.hpp"

namespace suglg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n.
GaussRule make_gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

const GaussRule& gauss_legendre(int n) {
  static const GaussRule g6 = make_gauss_legendre(6);
  static const GaussRule g10 = make_gauss_legendre(10);
  static const GaussRule g12 = make_gauss_legendre(12);
  static const GaussRule g20 = make_gauss_legendre(20);
  switch (n) {
    case 6: return g6;
    case 10: return g10;
    case 12: return g12;
    default: return g20;
  }
}

// P(X > dh, Y > dk), Genz's BVNU.
double bvn_upper(double dh, double dk, double r) {
  if (dh == kInf || dk == kInf) return 0.0;
  if (dh == -kInf) return dk == -kInf ? 1.0 : norm_cdf(-dk);
  if (dk == -kInf) return norm_cdf(-dh);
  if (r == 0.0) return norm_cdf(-dh) * norm_cdf(-dk);

  const double tp = 2.0 * std::numbers::pi;
  double h = dh;
  double k = dk;
  double hk = h * k;
  double bvn = 0.0;

  const GaussRule& rule = gauss_legendre(std::abs(r) < 0.3 ? 6 : std::abs(r) < 0.75 ? 12 : 20);
  const auto& t = rule.nodes;
  const auto& w = rule.weights;

  if (std::abs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r) / 2.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double sn = std::sin(asr * (1.0 + t[i]));
      bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    bvn =bvn * asr / tp + norm_cdf(-h) * norm_cdf(-k);
  } else {
    if (r < 0.0) {
      k = -k;
      hk = -hk;
    }
    if (std::abs(r) < 1.0) {
      const double as = 1.0 - r * r;
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      double asr = -(bs / as + hk) / 2.0;
      const double c = (4.0 - hk) / 8.0;
      const double d = (12.0 - hk) / 80.0;
      if (asr > -100.0) bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
      if (hk > -100.0) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(tp) * norm_cdf(-b / a);
        bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
      }
      a /= 2.0;
      double acc = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double xs = std::pow(a * (1.0 + t[i]), 2);
        asr = -(bs / xs + hk) / 2.0;
        if (asr <= -100.0) continue;
        const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
        const double rs = std::sqrt(1.0 - xs);
        const double ep = std::exp(-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
        acc += w[i] * std::exp(asr) * (sp - ep);
      }
      bvn = (a * acc - bvn) / tp;
    }
    if (r > 0.0) {
      bvn += norm_cdf(-std::max(h, k));
    } else if (h >= k) {
      bvn = -bvn;
    } else {
      const double l = h < 0.0 ? norm_cdf(k) - norm_cdf(h) : norm_cdf(-h) - norm_cdf(-k);
      bvn = l - bvn;
    }
  }
  return std::max(0.0, std::min(1.0, bvn));
}

constexpr double kTolFloor = 1e-15;

double integrate_rec(const std::function<double(double)>& f, double a, double b, double whole,
                     double tol, int depth, int max_depth) {
  const double mid = 0.5 * (a + b);
  const GaussRule& rule = gauss_legendre(10);
  auto gl = [&](double lo, double hi) {
    const double half = 0.5 * (hi - lo);
    const double center = 0.5 * (hi + lo);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(center + half * rule.nodes[i]);
    return s * half;
  };
  const double left = gl(a, mid);
  const double right = gl(mid, b);
  const double refined = left + right;
  if (std::abs(refined - whole) <= std::max(tol, kTolFloor)) return refined;
  if (depth >= max_depth)
    throw NumericalError("integrate_adaptive: tolerance " + std::to_string(tol) +
                         " not reached on [" + std::to_string(a) + ", " + std::to_string(b) +
                         "], error estimate " + std::to_string(std::abs(refined - whole)));
  return integrate_rec(f, a, mid, left, tol / 2.0, depth + 1, max_depth) +
         integrate_rec(f, mid, b, right, tol / 2.0, depth + 1, max_depth);
}

// Correlation-scaled cdf by recursive conditioning on the first coordinate.
double cdf_recursive(const Vector& b, const Matrix& r, double tol) {
  const Index m = b.size();
  if (m == 1) return norm_cdf(b[0]);
  if (m == 2) return bvn_cdf(b[0], b[1], r(0, 1));
  if (b[0] == -kInf) return 0.0;

  const Vector rho = r.col(0).tail(m - 1);
  const Vector s = (1.0 - rho.array().square()).sqrt();
  if (s.minCoeff() < 1e-7)
    throw NumericalError("mvn_cdf: near-singular correlation (|rho| ~ 1) in recursive evaluation");
  const Matrix rc = (r.bottomRightCorner(m - 1, m - 1) - rho * rho.transpose()).array() /
                    (s * s.transpose()).array();
  const Vector rest = b.tail(m - 1);

  auto integrand = [&](double t) {
    const double x = norm_quantile(t);
    const Vector bc = ((rest - rho * x).array() / s.array()).matrix();
    return cdf_recursive(bc, rc, tol * 0.1);
  };
  const double upper = b[0] == kInf ? 1.0 : norm_cdf(b[0]);
  if (upper <= 0.0) return 0.0;
  return integrate_adaptive(integrand, 0.0, upper, tol);
}

constexpr std::array<double, 24> kPrimes = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37,
                                            41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89};

// Richtmyer lattice generator for dimension j.
double lattice_generator(Index j) {
  if (j < static_cast<Index>(kPrimes.size())) return std::sqrt(kPrimes[j]);
  // Beyond the table fall back to square roots of consecutive non-squares.
  const double k = static_cast<double>(j) + 100.0;
  return std::sqrt(k * k + 1.0);
}

// Separation-of-variables integrand: log of the product of conditional
// probabilities for one lattice point w (length m - 1).
double sov_log_integrand(const Matrix& lfac, const Vector& b, const double* w, Vector& y) {
  const Index m = b.size();
  double log_f = 0.0;
  for (Index i = 0; i < m; ++i) {
    const double partial = i == 0 ? 0.0 : lfac.row(i).head(i).dot(y.head(i));
    const double ei = norm_cdf((b[i] - partial) / lfac(i, i));
    if (ei <= 0.0) return -kInf;
    log_f += std::log(ei);
    if (i + 1 < m) {
      double q = w[i] * ei;
      q = std::min(std::max(q, 1e-300), 1.0 - 1e-16);
      y[i] = norm_quantile_approx(q);
    }
  }
  return log_f;
}

// Randomized lattice estimate; returns (mean, standard error).
std::pair<double, double> sov_lattice(const Matrix& cov, const Vector& b, long points, int shifts,
                                      std::uint64_t seed) {
  const Index m = b.size();
  const Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw FactorizationError("mvn_cdf: covariance is not positive definite");
  const Matrix lfac = llt.matrixL();

  Rng rng(seed);
  std::vector<double> estimates;
  Vector y = Vector::Zero(m);
  std::vector<double> w(std::max<Index>(m - 1, 1));
  for (int s = 0; s < shifts; ++s) {
    std::vector<double> shift(m);
    for (auto& v : shift) v = rng.uniform();
    double sum = 0.0;
    for (long k = 1; k <= points; ++k) {
      for (Index j = 0; j + 1 < m; ++j) {
        double frac = k * lattice_generator(j) + shift[j];
        frac -= std::floor(frac);
        w[j] = std::abs(2.0 * frac - 1.0);
      }
      sum += std::exp(sov_log_integrand(lfac, b, w.data(), y));
    }
    estimates.push_back(sum / points);
  }
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= shifts;
  double var = 0.0;
  for (double e : estimates) var += (e - mean) * (e - mean);
  var /= (shifts - 1.0) * shifts;
  return {mean, std::sqrt(var)};
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                          int max_depth) {
  const GaussRule& rule = gauss_legendre(10);
  const double half = 0.5 * (b - a);
  const double center = 0.5 * (b + a);
  double whole = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) whole += rule.weights[i] * f(center + half * rule.nodes[i]);
  whole *= half;
  return integrate_rec(f, a, b, whole, abs_tol, 0, max_depth);
}

double bvn_cdf(double h, double k, double rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) throw ArgumentError("bvn_cdf: correlation outside [-1, 1]");
  return bvn_upper(-h, -k, rho);
}

double mvn_cdf(const Vector& upper, const Matrix& cov, const CdfOptions& opts) {
  const Index m0 = upper.size();
  if (cov.rows() != m0 || cov.cols() != m0) throw ArgumentError("mvn_cdf: dimension mismatch");

  // Coordinates with an infinite upper limit integrate out.
  std::vector<Index> keep;
  for (Index i = 0; i < m0; ++i) {
    if (upper[i] == -kInf) return 0.0;
    if (upper[i] != kInf) keep.push_back(i);
  }
  if (keep.empty()) return 1.0;
  const Index m = static_cast<Index>(keep.size());
  const Matrix c = cov(keep, keep);
  const Vector sd = c.diagonal().cwiseSqrt();
  if (!(sd.minCoeff() > 0.0)) throw ArgumentError("mvn_cdf: zero variance component");
  const Vector b = upper(keep).cwiseQuotient(sd);
  const Matrix r = c.array() / (sd * sd.transpose()).array();

  if (m == 1) return norm_cdf(b[0]);
  if (m == 2) return bvn_cdf(b[0], b[1], std::clamp(r(0, 1), -1.0, 1.0));
  if (m <= opts.max_quadrature_dim) return cdf_recursive(b, r, opts.abs_tol);

  long points = 1024;
  for (;;) {
    const auto [mean, se] = sov_lattice(r, b, points, 12, 0x5eed0001ULL);
    if (3.0 * se <= opts.abs_tol) return mean;
    if (points * 2 > opts.max_lattice_points)
      throw NumericalError("mvn_cdf: lattice rule did not converge in dimension " + std::to_string(m) +
                           " (estimate " + std::to_string(mean) + ", 3*SE " + std::to_string(3.0 * se) +
                           ", tolerance " + std::to_string(opts.abs_tol) + ")");
    points *= 2;
  }
}

double log_orthant_probability(const Matrix& corr, int points) {
  const Index m = corr.rows();
  if (m == 0) return 0.0;
  if (m == 1) return std::log(0.5);
  const Eigen::LLT<Matrix> llt(corr);
  if (llt.info() != Eigen::Success)
    throw FactorizationError("log_orthant_probability: correlation is not positive definite");
  const Matrix lfac = llt.matrixL();
  const Vector b = Vector::Zero(m);

  // Fixed shift: deterministic in corr.
  std::vector<double> shift(m);
  for (Index j = 0; j < m; ++j) {
    const double g = (j + 1) * 0.6180339887498949;
    shift[j] = g - std::floor(g);
  }
  Vector y = Vector::Zero(m);
  std::vector<double> w(m);
  std::vector<double> logs(points);
  double max_log = -kInf;
  for (int k = 1; k <= points; ++k) {
    for (Index j = 0; j + 1 < m; ++j) {
      double frac = k * lattice_generator(j) + shift[j];
      frac -= std::floor(frac);
      w[j] = std::abs(2.0 * frac - 1.0);
    }
    logs[k - 1] = sov_log_integrand(lfac, b, w.data(), y);
    max_log = std::max(max_log, logs[k - 1]);
  }
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - max_log);
  return max_log + std::log(acc / points);
}

}  // namespace suglg
