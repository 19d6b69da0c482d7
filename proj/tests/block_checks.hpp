#pragma once

// Stationary-distribution checks for each update block on 1-D toy
// instances: the block is run on its own with everything else held fixed
// and the draws are compared with the grid-normalized exact conditional
// built from oracle::log_joint.

#include <string>
#include <vector>

#include "oracles.hpp"
#include "suglg/sampler.hpp"

namespace blocks {

using namespace suglg;

struct BlockResult {
  std::string name;
  double sup_error = 0.0;
  /// Density at the unclipped grid ends relative to the peak.
  double edge_ratio = 0.0;
};

inline Hyperparams toy_hyper() {
  Hyperparams h;
  h.c0 = 4.0;
  h.c1 = 4.0;
  h.c2 = 2.0;
  h.c3 = 1.0;
  h.c4 = 0.5;
  h.c5 = 2.0;
  h.c6 = 0.5;
  h.c7 = 1.5;
  h.c8 = 0.7;
  h.c9 = 0.7;
  return h;
}

inline SpatialDataset toy_dataset(Index n, Index censored = -1, CensorInterval iv = {}) {
  const double pts[3][2] = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.5}};
  const double vals[3] = {0.8, 1.9, 1.2};
  SpatialDataset ds;
  ds.coords.resize(n, 2);
  ds.values.resize(n);
  for (Index i = 0; i < n; ++i) {
    ds.coords(i, 0) = pts[i][0];
    ds.coords(i, 1) = pts[i][1];
    ds.values[i] = vals[i];
  }
  ds.design = Matrix::Ones(n, 1);
  ds.intervals.assign(static_cast<std::size_t>(n), CensorInterval{});
  for (Index i = 0; i < n; ++i) ds.ids.push_back(std::to_string(i + 1));
  if (censored >= 0) {
    ds.values[censored] = std::numeric_limits<double>::quiet_NaN();
    ds.intervals[static_cast<std::size_t>(censored)] = iv;
  }
  return ds;
}

inline McmcState toy_state(const SpatialDataset& ds) {
  const Index n = ds.size();
  McmcState s;
  s.y = ds.values;
  for (Index i = 0; i < n; ++i)
    if (ds.is_censored(i)) s.y[i] = 0.2;
  s.u = Vector::LinSpaced(n, 0.4, 1.1);
  s.lambda = Vector::LinSpaced(n, 0.7, 1.3);
  s.params.beta = Vector::Constant(1, 0.3);
  s.params.alpha = 0.9;
  s.params.sigma2 = 0.6;
  s.params.omega2 = 0.3;
  s.params.nu = 0.8;
  s.params.theta_w = 0.9;
  s.params.theta_lambda = 1.1;
  return s;
}

using Getter = std::function<double(const McmcState&)>;
using Setter = std::function<void(McmcState&, double)>;
using Step = std::function<void(Sampler&, Rng&, McmcState&)>;

/// Runs one block `sweeps` times after a short adaptive warm-up and
/// compares the draws of the scalar it moves against the oracle.
///
/// When `log_scale` is set the grid is laid out in log coordinates and the
/// Jacobian is included, which keeps right-skewed targets well resolved.
inline BlockResult run_block(const std::string& name, const SpatialDataset& ds, McmcState s, const Step& step,
                             const Getter& get, const Setter& set, bool log_scale, long sweeps,
                             std::uint64_t seed, double support_lo = -std::numeric_limits<double>::infinity(),
                             double support_hi = std::numeric_limits<double>::infinity()) {
  ChainConfig cfg;
  cfg.kind = ModelKind::Suglg;
  cfg.hyper = toy_hyper();
  Sampler sm(ds, cfg);
  Rng rng(seed);
  sm.set_adapting(true);
  for (int t = 0; t < 2000; ++t) step(sm, rng, s);
  sm.set_adapting(false);
  std::vector<double> draws;
  draws.reserve(static_cast<std::size_t>(sweeps));
  for (long t = 0; t < sweeps; ++t) {
    step(sm, rng, s);
    const double v = get(s);
    draws.push_back(log_scale ? std::log(v) : v);
  }
  const auto [mn, mx] = std::minmax_element(draws.begin(), draws.end());
  const double width = *mx - *mn;
  double lo = *mn - (log_scale ? 6.0 : 0.6 * width);
  double hi = *mx + (log_scale ? 6.0 : 0.6 * width);
  const bool clip_lo = !log_scale && lo <= support_lo;
  const bool clip_hi = !log_scale && hi >= support_hi;
  if (clip_lo) lo = support_lo;
  if (clip_hi) hi = support_hi;
  const double med_d = sm.med_d();
  McmcState probe = s;
  const auto logf = [&](double t) {
    set(probe, log_scale ? std::exp(t) : t);
    return oracle::log_joint(ds, probe.y, probe.u, probe.lambda, probe.params, cfg.hyper, med_d, cfg.kind) +
           (log_scale ? t : 0.0);
  };
  const oracle::GridDensity g = oracle::grid_normalize(logf, lo, hi);
  const double peak = g.pdf.maxCoeff();
  const double edge = std::max(clip_lo ? 0.0 : g.pdf[0], clip_hi ? 0.0 : g.pdf[g.pdf.size() - 1]) / peak;
  return {name, oracle::ks_distance(draws, g), edge};
}

inline std::vector<BlockResult> run_all_blocks(long sweeps, std::uint64_t seed) {
  std::vector<BlockResult> out;
  const double inf = std::numeric_limits<double>::infinity();
  {
    const SpatialDataset ds = toy_dataset(2, 1, CensorInterval{-inf, 0.5});
    out.push_back(run_block(
        "censored", ds, toy_state(ds), [](Sampler& m, Rng& r, McmcState& s) { m.step_censored(r, s); },
        [](const McmcState& s) { return s.y[1]; }, [](McmcState& s, double v) { s.y[1] = v; }, false, sweeps,
        seed + 1, -inf, 0.5));
  }
  {
    const SpatialDataset ds = toy_dataset(1);
    out.push_back(run_block(
        "u", ds, toy_state(ds), [](Sampler& m, Rng& r, McmcState& s) { m.step_u(r, s); },
        [](const McmcState& s) { return s.u[0]; }, [](McmcState& s, double v) { s.u[0] = v; }, false, sweeps,
        seed + 2, 0.0, inf));
  }
  {
    const SpatialDataset ds = toy_dataset(1);
    out.push_back(run_block(
        "lambda", ds, toy_state(ds), [](Sampler& m, Rng& r, McmcState& s) { m.step_lambda(r, s); },
        [](const McmcState& s) { return s.lambda[0]; }, [](McmcState& s, double v) { s.lambda[0] = v; }, true,
        sweeps, seed + 3));
  }
  {
    const SpatialDataset ds = toy_dataset(3);
    out.push_back(run_block(
        "beta", ds, toy_state(ds), [](Sampler& m, Rng& r, McmcState& s) { m.step_beta(r, s); },
        [](const McmcState& s) { return s.params.beta[0]; }, [](McmcState& s, double v) { s.params.beta[0] = v; },
        false, sweeps, seed + 4));
  }
  {
    const SpatialDataset ds = toy_dataset(3);
    out.push_back(run_block(
        "alpha", ds, toy_state(ds), [](Sampler& m, Rng& r, McmcState& s) { m.step_alpha(r, s); },
        [](const McmcState& s) { return s.params.alpha; }, [](McmcState& s, double v) { s.params.alpha = v; },
        false, sweeps, seed + 5));
  }
  {
    const SpatialDataset ds = toy_dataset(3);
    out.push_back(run_block(
        "sigma2", ds, toy_state(ds), [](Sampler& m, Rng& r, McmcState& s) { m.step_sigma2(r, s); },
        [](const McmcState& s) { return s.params.sigma2; }, [](McmcState& s, double v) { s.params.sigma2 = v; },
        true, sweeps, seed + 6));
  }
  {
    const SpatialDataset ds = toy_dataset(2);
    out.push_back(run_block(
        "omega2", ds, toy_state(ds), [](Sampler& m, Rng& r, McmcState& s) { m.step_omega2(r, s); },
        [](const McmcState& s) { return s.params.omega2; }, [](McmcState& s, double v) { s.params.omega2 = v; },
        true, sweeps, seed + 7));
  }
  {
    const SpatialDataset ds = toy_dataset(1);
    McmcState s = toy_state(ds);
    s.lambda.setOnes();
    out.push_back(run_block(
        "nu", ds, s, [](Sampler& m, Rng& r, McmcState& st) { m.step_nu(r, st); },
        [](const McmcState& st) { return st.params.nu; }, [](McmcState& st, double v) { st.params.nu = v; }, true,
        sweeps, seed + 8));
  }
  {
    const SpatialDataset ds = toy_dataset(2);
    out.push_back(run_block(
        "theta_w", ds, toy_state(ds), [](Sampler& m, Rng& r, McmcState& s) { m.step_theta_w(r, s); },
        [](const McmcState& s) { return s.params.theta_w; }, [](McmcState& s, double v) { s.params.theta_w = v; },
        true, sweeps, seed + 9));
  }
  {
    const SpatialDataset ds = toy_dataset(3);
    out.push_back(run_block(
        "theta_lambda", ds, toy_state(ds), [](Sampler& m, Rng& r, McmcState& s) { m.step_theta_lambda(r, s); },
        [](const McmcState& s) { return s.params.theta_lambda; },
        [](McmcState& s, double v) { s.params.theta_lambda = v; }, true, sweeps, seed + 10));
  }
  return out;
}

}  // namespace blocks
