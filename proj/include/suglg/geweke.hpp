#pragma once

#include <functional>
#include <string>
#include <vector>

#include "suglg/sampler.hpp"

namespace suglg {

/// z-scores comparing prior-predictive and successive-conditional moments.
struct GewekeResult {
  std::vector<std::string> names;
  Vector z_first;
  Vector z_second;

  double max_abs_z() const;
};

using SweepFunction = std::function<void(Sampler&, Rng&, McmcState&)>;

/// Joint-distribution test of the sampler (Geweke 2004).
///
/// The marginal-conditional side draws (eta, lambda, U, y) from the prior
/// and the generative model; the successive-conditional side alternates a
/// fresh y | (U, lambda, eta) with one sweep. Every third site is treated
/// as censored on (-inf, inf) so the imputation block is exercised. The
/// successive side's standard errors use batch means. `sweep` defaults to
/// Sampler::sweep; tests substitute corrupted scans.
GewekeResult geweke_joint_test(Rng& rng, const Locations& locs, const ChainConfig& cfg, long iterations,
                               const SweepFunction& sweep = {});

}  // namespace suglg
