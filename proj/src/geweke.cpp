#include "suglg/geweke.hpp"

#include <cmath>

namespace suglg {

namespace {

struct Latents {
  Vector lambda;
  Vector u;
};

Latents draw_latents(Rng& rng, const ModelParams& p, const Matrix& dist, ModelKind kind) {
  const Index n = dist.rows();
  Latents l;
  l.lambda = Vector::Ones(n);
  l.u = Vector::Zero(n);
  if (is_mixture(kind)) {
    const auto llt = factorize_jittered(exp_correlation(dist, {p.theta_lambda}), "geweke lambda field");
    Vector z(n);
    for (Index i = 0; i < n; ++i) z[i] = rng.normal();
    const Vector psi = Vector::Constant(n, -0.5 * p.nu) + std::sqrt(p.nu) * Vector(llt.matrixL() * z);
    l.lambda = psi.array().exp();
  }
  if (is_skew(kind)) {
    Matrix c = exp_correlation(dist, {p.theta_w});
    c.diagonal().array() += kDiagonalJitter;
    const Vector zero = Vector::Zero(n);
    l.u = tmvn_sample_rejection(rng, zero, zero, c);
  }
  return l;
}

Vector draw_y(Rng& rng, const ModelParams& p, const Vector& lambda, const Vector& u, const Matrix& dist,
              const Matrix& design) {
  const Index n = dist.rows();
  Matrix c = exp_correlation(dist, {p.theta_w});
  c.diagonal().array() += kDiagonalJitter;
  const Matrix cov = p.sigma2 * build_b_matrix(c, lambda, p.omega2);
  const auto llt = factorize(cov, "geweke y");
  Vector z(n);
  for (Index i = 0; i < n; ++i) z[i] = rng.normal();
  return design * p.beta + p.alpha * u.cwiseProduct(lambda.cwiseSqrt().cwiseInverse()) + llt.matrixL() * z;
}

Vector test_functions(const ModelParams& p, const Vector& lambda, const Vector& u, ModelKind kind) {
  Vector f = parameter_vector(p, kind);
  const Index base = f.size();
  const Index extra = (is_mixture(kind) ? 1 : 0) + (is_skew(kind) ? 1 : 0);
  f.conservativeResize(base + extra);
  Index j = base;
  if (is_mixture(kind)) f[j++] = std::log(lambda[0]);
  if (is_skew(kind)) f[j++] = u[0];
  return f;
}

}  // namespace

double GewekeResult::max_abs_z() const {
  return std::max(z_first.cwiseAbs().maxCoeff(), z_second.cwiseAbs().maxCoeff());
}

GewekeResult geweke_joint_test(Rng& rng, const Locations& locs, const ChainConfig& cfg, long iterations,
                               const SweepFunction& sweep) {
  const Index n = locs.rows();
  if (n < 2 || n > 12) throw ArgumentError("geweke_joint_test: needs 2 <= n <= 12 sites");
  if (iterations < 100) throw ArgumentError("geweke_joint_test: needs at least 100 iterations");
  const ModelKind kind = cfg.kind;

  SpatialDataset ds = make_exact_dataset(locs, Vector::Zero(n));
  for (Index i = 2; i < n; i += 3) {
    ds.values[i] = std::numeric_limits<double>::quiet_NaN();
    ds.intervals[i] = CensorInterval{};
  }
  const Matrix dist = distance_matrix(locs);
  const double med_d = median_distance(dist);
  const Index k = ds.design.cols();

  GewekeResult res;
  res.names = parameter_names(kind, k);
  if (is_mixture(kind)) res.names.push_back("log_lambda0");
  if (is_skew(kind)) res.names.push_back("u0");
  const Index nf = static_cast<Index>(res.names.size());

  // Marginal-conditional simulator.
  Vector s1 = Vector::Zero(nf), s2 = Vector::Zero(nf), s3 = Vector::Zero(nf), s4 = Vector::Zero(nf);
  for (long t = 0; t < iterations; ++t) {
    const ModelParams p = sample_prior(rng, cfg.hyper, med_d, kind, k);
    const Latents l = draw_latents(rng, p, dist, kind);
    const Vector f = test_functions(p, l.lambda, l.u, kind);
    const Vector f2 = f.cwiseProduct(f);
    s1 += f;
    s2 += f.cwiseProduct(f);
    s3 += f2;
    s4 += f2.cwiseProduct(f2);
  }
  const double m = static_cast<double>(iterations);
  const Vector mc_mean1 = s1 / m;
  const Vector mc_var1 = s2 / m - mc_mean1.cwiseProduct(mc_mean1);
  const Vector mc_mean2 = s3 / m;
  const Vector mc_var2 = s4 / m - mc_mean2.cwiseProduct(mc_mean2);

  // Successive-conditional simulator.
  ChainConfig c = cfg;
  c.adapt = false;
  Sampler smp(ds, c);
  smp.set_adapting(false);
  McmcState s;
  s.params = sample_prior(rng, cfg.hyper, med_d, kind, k);
  const Latents l0 = draw_latents(rng, s.params, dist, kind);
  s.lambda = l0.lambda;
  s.u = l0.u;

  const long batches = 50;
  const long per_batch = iterations / batches;
  const long used = per_batch * batches;
  Matrix batch1 = Matrix::Zero(batches, nf), batch2 = Matrix::Zero(batches, nf);
  for (long t = 0; t < used; ++t) {
    s.y = draw_y(rng, s.params, s.lambda, s.u, dist, ds.design);
    if (sweep) sweep(smp, rng, s);
    else smp.sweep(rng, s);
    const Vector f = test_functions(s.params, s.lambda, s.u, kind);
    batch1.row(t / per_batch) += f.transpose();
    batch2.row(t / per_batch) += f.cwiseProduct(f).transpose();
  }
  batch1 /= static_cast<double>(per_batch);
  batch2 /= static_cast<double>(per_batch);

  auto z_scores = [&](const Matrix& batch, const Vector& mc_mean, const Vector& mc_var) {
    const Vector sc_mean = batch.colwise().mean();
    const Vector sc_var = (batch.rowwise() - sc_mean.transpose()).colwise().squaredNorm() / (batches - 1.0);
    const Vector se2 = mc_var / m + sc_var / static_cast<double>(batches);
    return Vector((mc_mean - sc_mean).array() / se2.array().sqrt());
  };
  res.z_first = z_scores(batch1, mc_mean1, mc_var1);
  res.z_second = z_scores(batch2, mc_mean2, mc_var2);
  return res;
}

}  // namespace suglg
