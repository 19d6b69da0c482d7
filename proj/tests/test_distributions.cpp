#include <doctest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "oracles.hpp"
#include "suglg/distributions.hpp"
#include "suglg/mvn_cdf.hpp"

using namespace suglg;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> draws_of(int n, const std::function<double()>& f) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& x : v) x = f();
  return v;
}

}  // namespace

TEST_CASE("mvn_logpdf closed forms") {
  CHECK(mvn_logpdf(Vector::Zero(1), Vector::Zero(1), Matrix::Identity(1, 1)) ==
        doctest::Approx(-0.5 * std::log(2 * kPi)).epsilon(1e-15));
  const Vector m = Vector::Constant(2, 3.7);
  CHECK(mvn_logpdf(m, m, Matrix::Identity(2, 2)) == doctest::Approx(-std::log(2 * kPi)).epsilon(1e-15));
  CHECK(mvn_logpdf(Vector::Ones(1), Vector::Zero(1), Matrix::Constant(1, 1, 4.0)) ==
        doctest::Approx(-0.5 * std::log(8 * kPi) - 0.125).epsilon(1e-15));
}

TEST_CASE("mvn_logpdf rejects bad input") {
  CHECK_THROWS_AS(mvn_logpdf(Vector::Zero(2), Vector::Zero(3), Matrix::Identity(2, 2)), ArgumentError);
  Matrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(mvn_logpdf(Vector::Zero(2), Vector::Zero(2), bad), FactorizationError);
}

TEST_CASE("mvn_logpdf agrees with a dense-inverse oracle") {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix a = Matrix::NullaryExpr(4, 4, [&](Index, Index) { return rng.normal(); });
    const Matrix cov = a * a.transpose() + 0.5 * Matrix::Identity(4, 4);
    const Vector x = Vector::NullaryExpr(4, [&](Index) { return rng.normal(); });
    const Vector mu = Vector::NullaryExpr(4, [&](Index) { return rng.normal(); });
    CHECK(mvn_logpdf(x, mu, cov) == doctest::Approx(oracle::dense_mvn_logpdf(x, mu, cov)).epsilon(1e-10));
  }
}

TEST_CASE("mvn_conditional") {
  SUBCASE("independent blocks give the marginal") {
    const Vector mean = Vector::LinSpaced(3, 1.0, 3.0);
    const Matrix cov = Vector::LinSpaced(3, 1.0, 2.0).asDiagonal();
    const Index obs[] = {1};
    const auto c = mvn_conditional(mean, cov, obs, Vector::Constant(1, 9.0));
    CHECK(c.mean[0] == doctest::Approx(1.0));
    CHECK(c.mean[1] == doctest::Approx(3.0));
    CHECK(c.cov(0, 1) == doctest::Approx(0.0));
    CHECK(c.cov(1, 1) == doctest::Approx(2.0));
  }
  SUBCASE("bivariate textbook case") {
    const double rho = 0.6, z = 1.7;
    Matrix cov(2, 2);
    cov << 1.0, rho, rho, 1.0;
    const Index obs[] = {1};
    const auto c = mvn_conditional(Vector::Zero(2), cov, obs, Vector::Constant(1, z));
    CHECK(c.mean[0] == doctest::Approx(rho * z));
    CHECK(c.cov(0, 0) == doctest::Approx(1 - rho * rho));
  }
  SUBCASE("three exponential-correlation sites against a grid") {
    Matrix coords(3, 2);
    coords << 0, 0, 1, 0, 0, 2;
    const Matrix cov = 1.3 * oracle::exp_corr(coords, 1.5);
    const Vector mean(Vector::LinSpaced(3, -0.5, 0.5));
    const Index obs[] = {1, 2};
    const Vector vals = Vector::LinSpaced(2, 0.4, -0.3);
    const auto c = mvn_conditional(mean, cov, obs, vals);
    const auto g = oracle::grid_normalize(
        [&](double y1) {
          Vector y(3);
          y << y1, vals[0], vals[1];
          return oracle::dense_mvn_logpdf(y, mean, cov);
        },
        -12.0, 12.0);
    double m1 = 0.0, m2 = 0.0;
    const double h = g.x[1] - g.x[0];
    for (Index i = 0; i < g.x.size(); ++i) {
      m1 += h * g.pdf[i] * g.x[i];
      m2 += h * g.pdf[i] * g.x[i] * g.x[i];
    }
    CHECK(c.mean[0] == doctest::Approx(m1).epsilon(1e-8));
    CHECK(c.cov(0, 0) == doctest::Approx(m2 - m1 * m1).epsilon(1e-7));
  }
}

TEST_CASE("tn1_sample moments") {
  Rng rng(11);
  constexpr int n = 200000;
  {
    const auto m = oracle::moments(draws_of(n, [&] { return tn1_sample(rng, 0.0, 0.0, 1.0); }));
    CHECK(std::abs(m.mean - std::sqrt(2 / kPi)) < 4 * m.se);
  }
  {
    const auto m = oracle::moments(draws_of(n, [&] { return tn1_sample(rng, 0.0, 5.0, 1.0); }));
    CHECK(std::abs(m.mean - 5.0) < 4 * m.se);
  }
  {
    boost::math::quadrature::exp_sinh<double> es;
    const auto f = [](double x) { return std::exp(-0.5 * (x + 10) * (x + 10) + 50.0); };
    const double ref = es.integrate([&](double x) { return x * f(x); }, 0.0, INFINITY) /
                       es.integrate(f, 0.0, INFINITY);
    CHECK(ref == doctest::Approx(0.09810).epsilon(1e-3));
    const auto m = oracle::moments(draws_of(n, [&] { return tn1_sample(rng, 0.0, -10.0, 1.0); }));
    CHECK(std::abs(m.mean - ref) < 4 * m.se);
    CHECK(tn1_mean(0.0, -10.0, 1.0) == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("truncated samplers respect their bounds") {
  Rng rng(12);
  for (int i = 0; i < 20000; ++i) {
    CHECK(tn1_sample(rng, 30.0, 0.0, 1.0) > 30.0);
    const double v = tn_interval_sample(rng, -0.2, -0.1, 4.0, 0.5);
    CHECK(v > -0.2);
    CHECK(v < -0.1);
  }
  Matrix cov(3, 3);
  cov << 1.0, 0.8, 0.5, 0.8, 1.0, 0.8, 0.5, 0.8, 1.0;
  const Vector lower(Vector::LinSpaced(3, -1.0, 1.0));
  Vector x = Vector::Constant(3, 2.0);
  for (int i = 0; i < 2000; ++i) {
    x = tmvn_sample(rng, lower, Vector::Zero(3), cov, 1, &x);
    CHECK((x.array() > lower.array()).all());
  }
}

TEST_CASE("tmvn_sample with diagonal covariance matches independent tn1") {
  Rng rng(13);
  const Vector lower(Vector::LinSpaced(2, 0.0, 1.0));
  const Vector mean(Vector::LinSpaced(2, 0.5, -0.5));
  const Matrix cov = Vector::LinSpaced(2, 1.0, 2.0).asDiagonal();
  std::vector<double> a, b;
  for (int i = 0; i < 100000; ++i) {
    const Vector x = tmvn_sample(rng, lower, mean, cov, 1);
    a.push_back(x[0]);
    b.push_back(x[1]);
  }
  const auto ma = oracle::moments(a);
  const auto mb = oracle::moments(b);
  CHECK(std::abs(ma.mean - tn1_mean(0.0, 0.5, 1.0)) < 4 * ma.se);
  CHECK(std::abs(mb.mean - tn1_mean(1.0, -0.5, 2.0)) < 4 * mb.se);
}

TEST_CASE("tmvn_sample matches rejection for a correlated pair") {
  Rng rng(14);
  Matrix cov(2, 2);
  cov << 1.0, 0.5, 0.5, 1.0;
  const Vector zero = Vector::Zero(2);
  std::vector<double> g, r;
  for (int i = 0; i < 100000; ++i) {
    g.push_back(tmvn_sample(rng, zero, zero, cov, 10)[1]);
    r.push_back(tmvn_sample_rejection(rng, zero, zero, cov)[1]);
  }
  const auto mg = oracle::moments(g);
  const auto mr = oracle::moments(r);
  CHECK(std::abs(mg.mean - mr.mean) < 4 * std::hypot(mg.se, mr.se));
}

TEST_CASE("sun_logpdf") {
  SunParams sp;
  sp.mu = Vector::Zero(1);
  sp.sigma = Matrix::Identity(1, 1);
  sp.gamma = Matrix::Constant(1, 1, 0.6);
  sp.v = Vector::Zero(1);
  sp.delta = Matrix::Identity(1, 1);
  CHECK(sun_logpdf(Vector::Zero(1), sp) == doctest::Approx(-0.5 * std::log(2 * kPi)).epsilon(1e-14));

  boost::math::quadrature::sinh_sinh<double> ss;
  for (double g : {-0.99, -0.4, 0.2, 0.8}) {
    sp.gamma(0, 0) = g;
    sp.v[0] = 0.3;
    const double total = ss.integrate([&](double x) { return std::exp(sun_logpdf(Vector::Constant(1, x), sp)); });
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("sun_logpdf with m = 2 integrates to one") {
  SunParams sp;
  sp.mu = Vector::Constant(1, -0.2);
  sp.sigma = Matrix::Constant(1, 1, 1.5);
  sp.gamma.resize(1, 2);
  sp.gamma << 0.5, -0.3;
  sp.v = Vector::LinSpaced(2, 0.1, -0.4);
  sp.delta.resize(2, 2);
  sp.delta << 1.0, 0.3, 0.3, 1.0;
  boost::math::quadrature::sinh_sinh<double> ss;
  const double total = ss.integrate([&](double x) { return std::exp(sun_logpdf(Vector::Constant(1, x), sp)); });
  CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("SunParams validation") {
  SunParams sp;
  sp.mu = Vector::Zero(1);
  sp.sigma = Matrix::Identity(1, 1);
  sp.gamma = Matrix::Constant(1, 1, 1.5);
  sp.v = Vector::Zero(1);
  sp.delta = Matrix::Identity(1, 1);
  CHECK_THROWS(sp.validate());
  sp.gamma(0, 0) = 0.5;
  sp.delta(0, 0) = 2.0;
  CHECK_THROWS(sp.validate());
}

TEST_CASE("sun_sample") {
  Rng rng(15);
  SUBCASE("n = 1 mean") {
    const double alpha = 2.0;
    const auto m =
        oracle::moments(draws_of(200000, [&] { return sun_sample(rng, alpha, 0.7, Matrix::Identity(1, 1))[0]; }));
    CHECK(std::abs(m.mean - alpha * std::sqrt(2 / kPi)) < 4 * m.se);
  }
  SUBCASE("alpha = 0 gives sigma^2 corr") {
    Matrix corr(2, 2);
    corr << 1.0, 0.4, 0.4, 1.0;
    std::vector<double> prod, sq;
    for (int i = 0; i < 200000; ++i) {
      const Vector w = sun_sample(rng, 0.0, 1.5, corr);
      prod.push_back(w[0] * w[1]);
      sq.push_back(w[0] * w[0]);
    }
    const auto mp = oracle::moments(prod);
    const auto ms = oracle::moments(sq);
    CHECK(std::abs(mp.mean - 2.25 * 0.4) < 4 * mp.se);
    CHECK(std::abs(ms.mean - 2.25) < 4 * ms.se);
  }
  SUBCASE("bivariate skewness against the direct representation") {
    Matrix coords(2, 2);
    coords << 0, 0, 1, 0;
    const Matrix corr = oracle::exp_corr(coords, 1.0);
    const Eigen::LLT<Matrix> llt(corr);
    Rng other(99);
    std::vector<double> a, b;
    for (int i = 0; i < 100000; ++i) {
      a.push_back(sun_sample(rng, 1.5, 0.5, corr)[1]);
      Vector u(2);
      do {
        const Vector z(Vector::NullaryExpr(2, [&](Index) { return other.normal(); }));
        u = llt.matrixL() * z;
      } while ((u.array() <= 0.0).any());
      const Vector v = llt.matrixL() * Vector(Vector::NullaryExpr(2, [&](Index) { return other.normal(); }));
      b.push_back(1.5 * u[1] + 0.5 * v[1]);
    }
    const auto skew = [](const std::vector<double>& v) {
      const auto m = oracle::moments(v);
      double s = 0.0;
      for (double x : v) s += std::pow(x - m.mean, 3);
      return s / v.size() / std::pow(m.var, 1.5);
    };
    CHECK(skew(a) == doctest::Approx(skew(b)).epsilon(0.08));
  }
}

TEST_CASE("gig_logpdf is normalized") {
  boost::math::quadrature::exp_sinh<double> es;
  for (const GigParams& g : {GigParams{0.0, 0.1, 9.0}, GigParams{-5.0, 2.0, 1.0}, GigParams{1.5, 0.0, 2.0},
                             GigParams{-2.0, 1.0, 0.0}, GigParams{3.0, 0.7, 0.4}}) {
    const double total = es.integrate([&](double x) { return x > 0 ? std::exp(gig_logpdf(x, g)) : 0.0; }, 0.0,
                                      std::numeric_limits<double>::infinity());
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("gig_mean against the Bessel ratio") {
  const double a = 0.1, b = 9.0;
  const double ref = (a / b) * boost::math::cyl_bessel_k(1.0, a * b) / boost::math::cyl_bessel_k(0.0, a * b);
  CHECK(gig_mean(GigParams{0.0, a, b}) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("gig_sample") {
  Rng rng(16);
  SUBCASE("benchmark prior mean") {
    const GigParams g{0.0, 0.1, 9.0};
    const auto m = oracle::moments(draws_of(200000, [&] { return gig_sample(rng, g); }));
    CHECK(std::abs(m.mean - gig_mean(g)) < 4 * m.se);
  }
  SUBCASE("Gamma limit") {
    const GigParams g{2.0, 1e-12, 1.0};
    const auto m = oracle::moments(draws_of(200000, [&] { return gig_sample(rng, g); }));
    CHECK(std::abs(m.mean - 4.0) < 4 * m.se);
  }
  SUBCASE("histogram for p = -5") {
    const auto x = draws_of(200000, [&] { return gig_sample(rng, GigParams{-5.0, 2.0, 1.0}); });
    const auto g =
        oracle::grid_normalize([](double t) { return -6.0 * std::log(t) - 0.5 * (4.0 / t + t); }, 1e-3, 15.0, 100001);
    CHECK(oracle::ks_distance(x, g) < 0.02);
  }
  SUBCASE("invalid parameters") {
    CHECK_THROWS_AS(gig_sample(rng, GigParams{0.0, 0.0, 0.0}), ArgumentError);
    CHECK_THROWS_AS(gig_sample(rng, GigParams{-1.0, 0.0, 1.0}), ArgumentError);
    CHECK_THROWS_AS(gig_sample(rng, GigParams{1.0, 1.0, 0.0}), ArgumentError);
  }
}

TEST_CASE("samplers are deterministic in the seed") {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) {
    CHECK(gig_sample(a, GigParams{0.5, 1.0, 2.0}) == gig_sample(b, GigParams{0.5, 1.0, 2.0}));
    CHECK(tn1_sample(a, 1.0, 0.0, 1.0) == tn1_sample(b, 1.0, 0.0, 1.0));
  }
}

TEST_CASE("bvn_cdf against one-dimensional quadrature") {
  boost::math::quadrature::tanh_sinh<double> ts;
  for (double rho : {-0.95, -0.3, 0.0, 0.5, 0.9}) {
    for (auto [h, k] : {std::pair{0.3, -0.7}, std::pair{-1.5, 2.0}, std::pair{1.0, 1.0}}) {
      const double s = std::sqrt(1 - rho * rho);
      const double ref = ts.integrate(
          [&](double x) { return norm_pdf(x) * norm_cdf((k - rho * x) / s); }, -40.0, h);
      CHECK(bvn_cdf(h, k, rho) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("mvn_cdf and orthant probabilities") {
  Matrix coords(3, 2);
  coords << 0, 0, 1, 0, 0.5, 1;
  const Matrix c3 = oracle::exp_corr(coords, 1.2);
  CHECK(mvn_cdf(Vector::Zero(3), c3) == doctest::Approx(oracle::orthant(c3)).epsilon(1e-8));
  CHECK(std::exp(log_orthant_probability(c3, 1024)) == doctest::Approx(oracle::orthant(c3)).epsilon(1e-4));

  Matrix c5 = Matrix::Constant(5, 5, 0.5);
  c5.diagonal().setOnes();
  // Equicorrelated 0.5: P(all > 0) = 1 / (n + 1).
  CHECK(mvn_cdf(Vector::Zero(5), c5, CdfOptions{1e-5}) == doctest::Approx(1.0 / 6.0).epsilon(1e-5));
  CHECK(std::exp(log_orthant_probability(c5, 4096)) == doctest::Approx(1.0 / 6.0).epsilon(1e-3));

  const Vector upper(Vector::LinSpaced(3, 0.5, -0.2));
  const Matrix c3n = c3;
  Vector lim = upper;
  lim[1] = std::numeric_limits<double>::infinity();
  CHECK(mvn_cdf(lim, c3n) == doctest::Approx(bvn_cdf(upper[0], upper[2], c3n(0, 2))).epsilon(1e-10));
}
