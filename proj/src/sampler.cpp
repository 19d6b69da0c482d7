#include "suglg/sampler.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "suglg/mvn_cdf.hpp"

namespace suglg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kTargetAcceptance = 0.44;

double log_normal_density(double x, double mean, double var) {
  const double z = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + z * z / var);
}

}  // namespace

ChainConfig ChainConfig::quick() { return ChainConfig{}; }

ChainConfig ChainConfig::paper() {
  ChainConfig c;
  c.length = 150000;
  c.burn_in = 100000;
  c.thin = 100;
  return c;
}

void ChainConfig::validate() const {
  if (length < 1) throw ArgumentError("chain length must be positive");
  if (burn_in < 0 || burn_in >= length) throw ArgumentError("burn-in must satisfy 0 <= burn_in < length");
  if (thin < 1) throw ArgumentError("thin must be >= 1");
  if (u_sweeps < 1) throw ArgumentError("u_sweeps must be >= 1");
  if (orthant_points < 0) throw ArgumentError("orthant_points must be nonnegative");
  hyper.validate();
  for (double s : {proposal.sigma2, proposal.omega2, proposal.nu, proposal.lambda, proposal.theta_w,
                   proposal.theta_lambda})
    if (!(s > 0.0)) throw ArgumentError("proposal scales must be positive");
}

Vector ChainOutput::completed_y(Index d, const SpatialDataset& ds) const {
  Vector y = ds.values;
  for (std::size_t j = 0; j < censored.size(); ++j) y[censored[j]] = y_imputed(d, static_cast<Index>(j));
  return y;
}

std::vector<std::string> parameter_names(ModelKind kind, Index k) {
  std::vector<std::string> names;
  for (Index j = 0; j < k; ++j) names.push_back("beta" + std::to_string(j));
  if (is_skew(kind)) names.push_back("alpha");
  names.push_back("sigma2");
  names.push_back("omega2");
  if (is_mixture(kind)) names.push_back("nu");
  names.push_back("theta_w");
  if (is_mixture(kind)) names.push_back("theta_lambda");
  return names;
}

Vector parameter_vector(const ModelParams& p, ModelKind kind) {
  std::vector<double> v(p.beta.data(), p.beta.data() + p.beta.size());
  if (is_skew(kind)) v.push_back(p.alpha);
  v.push_back(p.sigma2);
  v.push_back(p.omega2);
  if (is_mixture(kind)) v.push_back(p.nu);
  v.push_back(p.theta_w);
  if (is_mixture(kind)) v.push_back(p.theta_lambda);
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

Matrix parameter_table(const ChainOutput& chain) {
  if (chain.params.empty()) return {};
  const Index k = chain.params.front().beta.size();
  const Index cols = static_cast<Index>(parameter_names(chain.kind, k).size());
  Matrix t(chain.size(), cols);
  for (Index d = 0; d < chain.size(); ++d) t.row(d) = parameter_vector(chain.params[d], chain.kind).transpose();
  return t;
}

// ---------------------------------------------------------------------------

Sampler::Sampler(const SpatialDataset& ds, ChainConfig cfg) : ds_(ds), cfg_(std::move(cfg)) {
  ds_.validate();
  cfg_.validate();
  const Index n = ds_.size();
  if (n >= 2) {
    dist_ = distance_matrix(ds_.coords);
    med_d_ = median_distance(dist_);
  } else {
    dist_ = Matrix::Zero(1, 1);
    med_d_ = 1.0;
  }
  exact_ = ds_.exact_indices();
  censored_ = ds_.censored_indices();
  orthant_points_ = cfg_.orthant_points > 0 ? cfg_.orthant_points : (n <= 30 ? 1024 : 256);
  scales_ = cfg_.proposal;
  a_lambda_.resize(n);
}

void Sampler::fill_corr(CorrCache& c, double theta, bool want_inverse) {
  c.theta = theta;
  c.corr = exp_correlation(dist_, {theta});
  c.corr.diagonal().array() += kDiagonalJitter;
  c.llt.compute(c.corr);
  if (c.llt.info() != Eigen::Success) {
    c.theta = std::numeric_limits<double>::quiet_NaN();
    throw FactorizationError("correlation matrix not positive definite at theta = " + std::to_string(theta));
  }
  c.log_det = 2.0 * c.llt.matrixLLT().diagonal().array().log().sum();
  c.inverse.resize(0, 0);
  if (want_inverse) c.inverse = c.llt.solve(Matrix::Identity(c.corr.rows(), c.corr.cols()));
  c.log_orthant = std::numeric_limits<double>::quiet_NaN();
}

const Sampler::CorrCache& Sampler::corr_w(double theta) {
  if (cw_.theta != theta) fill_corr(cw_, theta, false);
  if (is_skew(cfg_.kind) && cw_.inverse.size() == 0)
    cw_.inverse = cw_.llt.solve(Matrix::Identity(cw_.corr.rows(), cw_.corr.cols()));
  return cw_;
}

const Sampler::CorrCache& Sampler::corr_lambda(double theta) {
  if (cl_.theta != theta) fill_corr(cl_, theta, true);
  return cl_;
}

double Sampler::log_orthant(CorrCache& c) {
  if (std::isnan(c.log_orthant)) c.log_orthant = log_orthant_probability(c.corr, orthant_points_);
  return c.log_orthant;
}

Matrix Sampler::covariance_y(const Matrix& corr, const Vector& lambda, double sigma2, double omega2) const {
  return sigma2 * build_b_matrix(corr, lambda, omega2);
}

void Sampler::set_precision_from(const McmcState& s, const Eigen::LLT<Matrix>& llt) {
  const Index n = ds_.size();
  pc_.prec = llt.solve(Matrix::Identity(n, n));
  pc_.log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  pc_.theta_w = s.params.theta_w;
  pc_.sigma2 = s.params.sigma2;
  pc_.omega2 = s.params.omega2;
  pc_.lambda = s.lambda;
  pc_.valid = true;
}

const Sampler::PrecisionCache& Sampler::precision(const McmcState& s) {
  const auto& p = s.params;
  if (pc_.valid && pc_.theta_w == p.theta_w && pc_.omega2 == p.omega2 && pc_.lambda == s.lambda) {
    if (pc_.sigma2 != p.sigma2) {
      pc_.prec *= pc_.sigma2 / p.sigma2;
      pc_.log_det += ds_.size() * std::log(p.sigma2 / pc_.sigma2);
      pc_.sigma2 = p.sigma2;
    }
    return pc_;
  }
  const Matrix cov = covariance_y(corr_w(p.theta_w).corr, s.lambda, p.sigma2, p.omega2);
  const Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw FactorizationError("covariance of y is not positive definite");
  set_precision_from(s, llt);
  return pc_;
}

Vector Sampler::residual(const McmcState& s) const {
  return s.y - ds_.design * s.params.beta - s.params.alpha * s.u.cwiseProduct(s.lambda.cwiseSqrt().cwiseInverse());
}

double Sampler::gaussian_loglik(const Vector& r, const Eigen::LLT<Matrix>& llt) const {
  const Vector z = llt.matrixL().solve(r);
  const double log_det = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (z.squaredNorm() + log_det + r.size() * kLog2Pi);
}

double Sampler::psi_loglik(const Vector& psi, double nu, const CorrCache& c) const {
  const Index n = psi.size();
  const Vector a = psi.array() + 0.5 * nu;
  const Vector z = c.llt.matrixL().solve(a);
  return -0.5 * (n * (kLog2Pi + std::log(nu)) + c.log_det + z.squaredNorm() / nu);
}

bool Sampler::metropolis(Rng& rng, Adaptive& a, double log_ratio) {
  const bool accept = std::log(rng.uniform()) < log_ratio;
  ++a.tries;
  if (accept) ++a.accepts;
  if (adapting_) {
    const double prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
    const double gain = std::min(0.5, 1.0 / std::pow(static_cast<double>(iteration_) + 1.0, 0.6));
    a.log_scale += gain * (prob - kTargetAcceptance);
    a.log_scale = std::clamp(a.log_scale, -10.0, 5.0);
  }
  return accept;
}

void Sampler::reset_acceptance() {
  for (Adaptive* a : {&a_sigma2_, &a_omega2_, &a_nu_, &a_theta_w_, &a_theta_lambda_}) a->tries = a->accepts = 0;
  for (auto& a : a_lambda_) a.tries = a.accepts = 0;
}

std::map<std::string, double> Sampler::acceptance_rates() const {
  std::map<std::string, double> out;
  auto rate = [](const Adaptive& a) { return a.tries > 0 ? static_cast<double>(a.accepts) / a.tries : 0.0; };
  if (cfg_.sigma2_mode == Sigma2Mode::Metropolis) out["sigma2"] = rate(a_sigma2_);
  if (cfg_.omega2_mode == Omega2Mode::Metropolis) out["omega2"] = rate(a_omega2_);
  out["theta_w"] = rate(a_theta_w_);
  if (is_mixture(cfg_.kind)) {
    out["nu"] = rate(a_nu_);
    out["theta_lambda"] = rate(a_theta_lambda_);
    long tries = 0;
    long accepts = 0;
    for (const auto& a : a_lambda_) {
      tries += a.tries;
      accepts += a.accepts;
    }
    out["lambda"] = tries > 0 ? static_cast<double>(accepts) / tries : 0.0;
  }
  return out;
}

McmcState Sampler::initial_state(Rng& rng) {
  const Index n = ds_.size();
  const Index k = ds_.design.cols();
  const Index m = static_cast<Index>(exact_.size());
  const Matrix xj = ds_.design(exact_, Eigen::all);
  const Vector yj = ds_.values(exact_);

  McmcState s;
  s.params.beta = xj.colPivHouseholderQr().solve(yj);
  const Vector res = yj - xj * s.params.beta;
  double var = m > k ? res.squaredNorm() / static_cast<double>(m - k) : 1.0;
  if (!(var > 0.0) || !std::isfinite(var)) var = 1.0;
  s.params.sigma2 = var;
  s.params.alpha = is_skew(cfg_.kind) ? 0.1 : 0.0;
  s.params.omega2 = 0.5;
  s.params.nu = 0.5;
  s.params.theta_w = med_d_;
  s.params.theta_lambda = med_d_;
  s.lambda = Vector::Ones(n);
  s.u = Vector::Zero(n);
  if (is_skew(cfg_.kind))
    for (Index i = 0; i < n; ++i) s.u[i] = std::abs(rng.normal());

  const double sd = std::sqrt(var);
  s.y = ds_.values;
  for (Index i : censored_) {
    const auto& iv = ds_.intervals[i];
    if (std::isfinite(iv.lo) && std::isfinite(iv.hi)) s.y[i] = 0.5 * (iv.lo + iv.hi);
    else if (std::isfinite(iv.lo)) s.y[i] = iv.lo + sd;
    else if (std::isfinite(iv.hi)) s.y[i] = iv.hi - sd;
    else s.y[i] = ds_.design.row(i).dot(s.params.beta);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Gibbs blocks

std::pair<double, double> Sampler::censored_conditional(const McmcState& s, Index i) {
  const auto& pc = precision(s);
  const Vector r = residual(s);
  const double q = pc.prec(i, i);
  return {s.y[i] - pc.prec.col(i).dot(r) / q, 1.0 / q};
}

void Sampler::step_censored(Rng& rng, McmcState& s) {
  if (censored_.empty()) return;
  const auto& pc = precision(s);
  const Vector r = residual(s);
  Vector pr = pc.prec * r;
  for (Index i : censored_) {
    const double q = pc.prec(i, i);
    const double mean = s.y[i] - pr[i] / q;
    const auto& iv = ds_.intervals[i];
    const double draw = tn_interval_sample(rng, iv.lo, iv.hi, mean, 1.0 / q);
    pr += pc.prec.col(i) * (draw - s.y[i]);
    s.y[i] = draw;
  }
}

CanonicalForm Sampler::u_conditional(const McmcState& s) {
  const auto& cw = corr_w(s.params.theta_w);
  const auto& pc = precision(s);
  const Vector d = s.lambda.array().rsqrt();
  const double a = s.params.alpha;
  const Vector z = s.y - ds_.design * s.params.beta;
  CanonicalForm f;
  f.precision = cw.inverse + a * a * (d.asDiagonal() * pc.prec * d.asDiagonal());
  f.linear = a * d.cwiseProduct(pc.prec * z);
  return f;
}

void Sampler::step_u(Rng& rng, McmcState& s) {
  if (!is_skew(cfg_.kind)) return;
  const CanonicalForm f = u_conditional(s);
  const Index n = ds_.size();
  tmvn_gibbs_canonical(rng, s.u, f.precision, f.linear, Vector::Zero(n), Vector::Constant(n, kInf),
                       cfg_.u_sweeps);
}

ConditionalNormal Sampler::beta_conditional(const McmcState& s) {
  const auto& pc = precision(s);
  const Matrix& x = ds_.design;
  const Index k = x.cols();
  const Vector target = s.y - s.params.alpha * s.u.cwiseProduct(s.lambda.cwiseSqrt().cwiseInverse());
  const Matrix px = pc.prec * x;
  Matrix h = x.transpose() * px;
  h.diagonal().array() += 1.0 / cfg_.hyper.c0;
  const Eigen::LLT<Matrix> llt = factorize(h, "beta precision");
  ConditionalNormal out;
  out.mean = llt.solve(px.transpose() * target);
  out.cov = llt.solve(Matrix::Identity(k, k));
  return out;
}

void Sampler::step_beta(Rng& rng, McmcState& s) {
  const auto& pc = precision(s);
  const Matrix& x = ds_.design;
  const Index k = x.cols();
  const Vector target = s.y - s.params.alpha * s.u.cwiseProduct(s.lambda.cwiseSqrt().cwiseInverse());
  const Matrix px = pc.prec * x;
  Matrix h = x.transpose() * px;
  h.diagonal().array() += 1.0 / cfg_.hyper.c0;
  const Eigen::LLT<Matrix> llt = factorize(h, "beta precision");
  const Vector mean = llt.solve(px.transpose() * target);
  Vector z(k);
  for (Index j = 0; j < k; ++j) z[j] = rng.normal();
  s.params.beta = mean + llt.matrixU().solve(z);
}

std::pair<double, double> Sampler::alpha_conditional(const McmcState& s) {
  const auto& pc = precision(s);
  const Vector v = s.u.cwiseProduct(s.lambda.cwiseSqrt().cwiseInverse());
  const Vector z = s.y - ds_.design * s.params.beta;
  const Vector pv = pc.prec * v;
  const double h = v.dot(pv) + 1.0 / cfg_.hyper.c1;
  return {pv.dot(z) / h, 1.0 / h};
}

void Sampler::step_alpha(Rng& rng, McmcState& s) {
  if (!is_skew(cfg_.kind)) return;
  const auto [mean, var] = alpha_conditional(s);
  s.params.alpha = mean + std::sqrt(var) * rng.normal();
}

std::pair<double, double> Sampler::sigma2_conjugate(const McmcState& s) {
  const auto& pc = precision(s);
  const Vector r = residual(s);
  const double quad = s.params.sigma2 * r.dot(pc.prec * r);  // r' B^{-1} r
  return {cfg_.hyper.c2 + 0.5 * ds_.size(), cfg_.hyper.c3 + 0.5 * quad};
}

double Sampler::log_target_sigma2(const McmcState& s, double sigma2) {
  if (!(sigma2 > 0.0)) return -kInf;
  const auto& pc = precision(s);
  const Vector r = residual(s);
  const double ratio = sigma2 / s.params.sigma2;
  const double quad = r.dot(pc.prec * r) / ratio;
  const double log_det = pc.log_det + ds_.size() * std::log(ratio);
  return -0.5 * (quad + log_det + ds_.size() * kLog2Pi) +
         log_prior_sigma2(sigma2, cfg_.hyper.c2, cfg_.hyper.c3);
}

void Sampler::step_sigma2(Rng& rng, McmcState& s) {
  if (cfg_.sigma2_mode == Sigma2Mode::Conjugate) {
    const auto [shape, rate] = sigma2_conjugate(s);
    s.params.sigma2 = rate / rng.gamma(shape);
    return;
  }
  const double cur = s.params.sigma2;
  const double prop = cur * std::exp(proposal_sd(a_sigma2_, scales_.sigma2) * rng.normal());
  const double lr = log_target_sigma2(s, prop) - log_target_sigma2(s, cur) + std::log(prop / cur);
  if (metropolis(rng, a_sigma2_, lr)) s.params.sigma2 = prop;
}

double Sampler::log_target_omega2(const McmcState& s, double omega2) {
  if (!(omega2 > 0.0)) return -kInf;
  const auto& p = s.params;
  const Matrix cov = covariance_y(corr_w(p.theta_w).corr, s.lambda, p.sigma2, omega2);
  const Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) return -kInf;
  return gaussian_loglik(residual(s), llt) + log_prior_omega2(omega2, cfg_.hyper.c4, cfg_.hyper.c5);
}

void Sampler::step_omega2(Rng& rng, McmcState& s) {
  auto& p = s.params;
  const auto& pc = precision(s);
  const Vector r = residual(s);
  if (cfg_.omega2_mode == Omega2Mode::Gig) {
    const double quad = r.dot(pc.prec * r);  // b' B^{-1} b / sigma2
    const double a = std::sqrt(cfg_.hyper.c4 * cfg_.hyper.c4 + quad);
    p.omega2 = gig_sample(rng, GigParams{-0.5 * static_cast<double>(ds_.size()), a, cfg_.hyper.c5});
    return;
  }
  const double cur = p.omega2;
  const double prop = cur * std::exp(proposal_sd(a_omega2_, scales_.omega2) * rng.normal());
  const double lt_cur = -0.5 * (r.dot(pc.prec * r) + pc.log_det + ds_.size() * kLog2Pi) +
                        log_prior_omega2(cur, cfg_.hyper.c4, cfg_.hyper.c5);
  const Matrix cov = covariance_y(corr_w(p.theta_w).corr, s.lambda, p.sigma2, prop);
  const Eigen::LLT<Matrix> llt(cov);
  double lr = -kInf;
  if (llt.info() == Eigen::Success)
    lr = gaussian_loglik(r, llt) + log_prior_omega2(prop, cfg_.hyper.c4, cfg_.hyper.c5) - lt_cur +
         std::log(prop / cur);
  if (metropolis(rng, a_omega2_, lr)) {
    p.omega2 = prop;
    set_precision_from(s, llt);
  }
}

// ---------------------------------------------------------------------------
// Mixing field

double Sampler::log_target_lambda(const McmcState& s, Index i, double lambda_i) {
  if (!(lambda_i > 0.0)) return -kInf;
  Vector lam = s.lambda;
  lam[i] = lambda_i;
  const auto& p = s.params;
  const Matrix cov = covariance_y(corr_w(p.theta_w).corr, lam, p.sigma2, p.omega2);
  const Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) return -kInf;
  const Vector mean = ds_.design * p.beta + p.alpha * s.u.cwiseProduct(lam.cwiseSqrt().cwiseInverse());
  const auto& cl = corr_lambda(p.theta_lambda);
  const Vector psi = lam.array().log();
  return gaussian_loglik(s.y - mean, llt) + psi_loglik(psi, p.nu, cl) - psi.sum();
}

void Sampler::step_lambda(Rng& rng, McmcState& s) {
  if (!is_mixture(cfg_.kind)) return;
  const Index n = ds_.size();
  const auto& p = s.params;
  const Matrix& cw = corr_w(p.theta_w).corr;
  const Matrix& cinv = corr_lambda(p.theta_lambda).inverse;
  precision(s);
  Matrix& prec = pc_.prec;

  const double s2 = p.sigma2;
  const double tau2 = s2 * p.omega2;
  const double nu = p.nu;
  const double mu = -0.5 * nu;
  Vector psi = s.lambda.array().log();
  Vector d = s.lambda.array().rsqrt();
  const Vector xb = ds_.design * p.beta;
  Vector r = s.y - xb - p.alpha * s.u.cwiseProduct(d);
  Vector pr = prec * r;
  Vector cpsi = cinv * (psi.array() - mu).matrix();

  Vector g(n), pg(n), kg(n), kr(n), w(n), col(n);
  for (Index i = 0; i < n; ++i) {
    // Conditional law of y_i given the other sites, as a function of d_i.
    g = s2 * d.cwiseProduct(cw.col(i));
    g[i] = 0.0;
    pg.noalias() = prec * g;
    const double pii = prec(i, i);
    kg = pg - prec.col(i) * (pg[i] / pii);
    kg[i] = 0.0;
    kr = pr - prec.col(i) * (pr[i] / pii);
    kr[i] = 0.0;
    const double big_g = g.dot(kg);
    const double big_a = g.dot(kr);
    const double cii = s2 * cw(i, i);
    const double shift = p.alpha * s.u[i] + big_a;
    auto site = [&](double di) {
      return log_normal_density(s.y[i], xb[i] + di * shift, tau2 + di * di * (cii - big_g));
    };
    const double prior_var = nu / cinv(i, i);
    const double prior_mean = psi[i] - cpsi[i] / cinv(i, i);

    Adaptive& a = a_lambda_[i];
    const double psi_new = psi[i] + proposal_sd(a, scales_.lambda) * rng.normal();
    const double d_new = std::exp(-0.5 * psi_new);
    const double lr = site(d_new) - site(d[i]) + log_normal_density(psi_new, prior_mean, prior_var) -
                      log_normal_density(psi[i], prior_mean, prior_var);
    if (!metropolis(rng, a, lr)) continue;

    const double v_new = tau2 + d_new * d_new * (cii - big_g);
    col = prec.col(i);
    w = d_new * kg;
    w[i] = -1.0;
    prec.noalias() -= col * (col.transpose() / pii);
    prec.noalias() += w * (w.transpose() / v_new);
    pc_.log_det += std::log(v_new) + std::log(pii);

    cpsi += cinv.col(i) * (psi_new - psi[i]);
    psi[i] = psi_new;
    d[i] = d_new;
    s.lambda[i] = std::exp(psi_new);
    r[i] = s.y[i] - xb[i] - p.alpha * d_new * s.u[i];
    pr.noalias() = prec * r;
  }
  pc_.lambda = s.lambda;
}

double Sampler::log_target_nu(const McmcState& s, double nu) {
  if (!(nu > 0.0)) return -kInf;
  const Vector psi = s.lambda.array().log();
  return psi_loglik(psi, nu, corr_lambda(s.params.theta_lambda)) +
         gig_logpdf(nu, GigParams{0.0, cfg_.hyper.c6, cfg_.hyper.c7});
}

void Sampler::step_nu(Rng& rng, McmcState& s) {
  if (!is_mixture(cfg_.kind)) return;
  const double cur = s.params.nu;
  const double prop = cur * std::exp(proposal_sd(a_nu_, scales_.nu) * rng.normal());
  const double lr = log_target_nu(s, prop) - log_target_nu(s, cur) + std::log(prop / cur);
  if (metropolis(rng, a_nu_, lr)) s.params.nu = prop;
}

// ---------------------------------------------------------------------------
// Correlation ranges

double Sampler::log_target_theta_w(const McmcState& s, double theta) {
  if (!(theta > 0.0)) return -kInf;
  CorrCache* c = &cw_;
  if (cw_.theta != theta) {
    try {
      fill_corr(cw_prop_, theta, false);
    } catch (const FactorizationError&) {
      return -kInf;
    }
    c = &cw_prop_;
  }
  const auto& p = s.params;
  const Eigen::LLT<Matrix> llt(covariance_y(c->corr, s.lambda, p.sigma2, p.omega2));
  if (llt.info() != Eigen::Success) return -kInf;
  double lt = gaussian_loglik(residual(s), llt) + log_prior_theta(theta, cfg_.hyper.c8, med_d_);
  if (is_skew(cfg_.kind)) {
    const Vector z = c->llt.matrixL().solve(s.u);
    lt += -0.5 * (z.squaredNorm() + c->log_det + s.u.size() * kLog2Pi) - log_orthant(*c);
  }
  return lt;
}

void Sampler::step_theta_w(Rng& rng, McmcState& s) {
  auto& p = s.params;
  const double cur = p.theta_w;
  const double prop = cur * std::exp(proposal_sd(a_theta_w_, scales_.theta_w) * rng.normal());
  const auto& pc = precision(s);
  const Vector r = residual(s);

  auto u_term = [&](CorrCache& c) {
    if (!is_skew(cfg_.kind)) return 0.0;
    const Vector z = c.llt.matrixL().solve(s.u);
    return -0.5 * (z.squaredNorm() + c.log_det + s.u.size() * kLog2Pi) - log_orthant(c);
  };
  corr_w(cur);
  const double lt_cur = -0.5 * (r.dot(pc.prec * r) + pc.log_det + r.size() * kLog2Pi) + u_term(cw_) +
                        log_prior_theta(cur, cfg_.hyper.c8, med_d_);

  double lr = -kInf;
  Eigen::LLT<Matrix> llt;
  try {
    fill_corr(cw_prop_, prop, false);
    llt.compute(covariance_y(cw_prop_.corr, s.lambda, p.sigma2, p.omega2));
    if (llt.info() == Eigen::Success)
      lr = gaussian_loglik(r, llt) + u_term(cw_prop_) + log_prior_theta(prop, cfg_.hyper.c8, med_d_) - lt_cur +
           std::log(prop / cur);
  } catch (const FactorizationError&) {
    lr = -kInf;
  }
  if (metropolis(rng, a_theta_w_, lr)) {
    std::swap(cw_, cw_prop_);
    p.theta_w = prop;
    set_precision_from(s, llt);
  }
}

double Sampler::log_target_theta_lambda(const McmcState& s, double theta) {
  if (!(theta > 0.0)) return -kInf;
  const CorrCache* c = &cl_;
  if (cl_.theta != theta) {
    try {
      fill_corr(cl_prop_, theta, false);
    } catch (const FactorizationError&) {
      return -kInf;
    }
    c = &cl_prop_;
  }
  const Vector psi = s.lambda.array().log();
  return psi_loglik(psi, s.params.nu, *c) + log_prior_theta(theta, cfg_.hyper.c9, med_d_);
}

void Sampler::step_theta_lambda(Rng& rng, McmcState& s) {
  if (!is_mixture(cfg_.kind)) return;
  auto& p = s.params;
  const double cur = p.theta_lambda;
  const double prop = cur * std::exp(proposal_sd(a_theta_lambda_, scales_.theta_lambda) * rng.normal());
  const Vector psi = s.lambda.array().log();
  const double lt_cur = psi_loglik(psi, p.nu, corr_lambda(cur)) + log_prior_theta(cur, cfg_.hyper.c9, med_d_);
  double lr = -kInf;
  try {
    fill_corr(cl_prop_, prop, true);
    lr = psi_loglik(psi, p.nu, cl_prop_) + log_prior_theta(prop, cfg_.hyper.c9, med_d_) - lt_cur +
         std::log(prop / cur);
  } catch (const FactorizationError&) {
    lr = -kInf;
  }
  if (metropolis(rng, a_theta_lambda_, lr)) {
    std::swap(cl_, cl_prop_);
    p.theta_lambda = prop;
  }
}

// ---------------------------------------------------------------------------

double Sampler::log_conditional_exact(const McmcState& s) {
  if (censored_.empty()) {
    const auto& pc = precision(s);
    const Vector r = residual(s);
    return -0.5 * (r.dot(pc.prec * r) + pc.log_det + r.size() * kLog2Pi);
  }
  const auto& p = s.params;
  const Matrix cov = covariance_y(corr_w(p.theta_w).corr, s.lambda, p.sigma2, p.omega2);
  const Eigen::LLT<Matrix> llt = factorize(cov(exact_, exact_), "exact-site covariance");
  const Vector r = residual(s);
  return gaussian_loglik(r(exact_), llt);
}

void Sampler::sweep(Rng& rng, McmcState& s) {
  ++iteration_;
  step_censored(rng, s);
  step_u(rng, s);
  step_lambda(rng, s);
  step_beta(rng, s);
  step_alpha(rng, s);
  step_sigma2(rng, s);
  step_omega2(rng, s);
  step_nu(rng, s);
  step_theta_w(rng, s);
  step_theta_lambda(rng, s);
}

ChainOutput run_chain(const SpatialDataset& ds, const ChainConfig& cfg) {
  Rng rng(cfg.seed);
  return run_chain(rng, ds, cfg);
}

ChainOutput run_chain(Rng& rng, const SpatialDataset& ds, const ChainConfig& cfg) {
  Sampler smp(ds, cfg);
  McmcState s = smp.initial_state(rng);
  const Index n = ds.size();
  const long rows = cfg.retained();

  ChainOutput out;
  out.kind = cfg.kind;
  out.censored = ds.censored_indices();
  out.params.reserve(rows);
  out.lambda.resize(rows, n);
  out.u.resize(rows, n);
  out.y_imputed.resize(rows, static_cast<Index>(out.censored.size()));
  out.log_conditional.resize(rows);

  smp.set_adapting(cfg.adapt && cfg.burn_in > 0);
  Index row = 0;
  for (long t = 0; t < cfg.length; ++t) {
    if (t == cfg.burn_in) {
      smp.set_adapting(false);
      smp.reset_acceptance();
    }
    try {
      smp.sweep(rng, s);
    } catch (const FactorizationError& e) {
      throw FactorizationError("sweep " + std::to_string(t) + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("sweep " + std::to_string(t) + ": " + e.what());
    }
    if (t >= cfg.burn_in && (t - cfg.burn_in + 1) % cfg.thin == 0 && row < rows) {
      out.params.push_back(s.params);
      out.lambda.row(row) = s.lambda.transpose();
      out.u.row(row) = s.u.transpose();
      out.y_imputed.row(row) = s.y(out.censored).transpose();
      out.log_conditional[row] = smp.log_conditional_exact(s);
      ++row;
    }
  }
  out.acceptance = smp.acceptance_rates();
  return out;
}

}  // namespace suglg
