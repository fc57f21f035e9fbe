#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "localfactor/rules.hpp"

namespace localfactor {

// Pair of label vectors with uniform marginals: y(u) = x(u) where the
// per-vertex threshold variable w(u) lands at or below p, fresh z(u)
// otherwise. The threshold construction makes the reuse pattern monotone in
// p trial-by-trial, which is what common-random-number sweeps rely on.
struct CoupledDecoration {
  Decoration x;
  Decoration y;
  double p = 0;
  std::vector<bool> reuse_mask;  // y(u) == x(u) iff set
};

CoupledDecoration sample_coupled(Vertex n, double p, std::uint64_t seed);

struct GammaEstimate {
  double gamma_hat = 0;
  double std_error = 0;
  std::uint64_t trials = 0;
};

// Probability the rule selects the root of the canonical tree under both
// halves of a p-correlated decoration. The x labels of trial t are the same
// stream estimate_density(rule, d, trials, seed) uses, so at p = 1 the
// estimate reproduces alpha_hat from the identical trials, bit for bit.
GammaEstimate estimate_gamma(const LocalRule& rule, Vertex d, double p, std::uint64_t trials,
                             std::uint64_t seed, unsigned threads = 0);

struct OverlapResult {
  std::uint64_t intersection = 0;  // |I ∩ J|
  std::uint64_t size_x = 0;        // |I|
  std::uint64_t size_y = 0;        // |J|
  std::uint64_t tie_count = 0;
  std::uint64_t loop_count = 0;
  std::uint64_t multi_edge_count = 0;
};

// One regular sample, one coupled decoration, two runs of the rule.
OverlapResult overlap_experiment(const LocalRule& rule, Vertex n, Vertex d, double p,
                                 std::uint64_t seed);

struct GammaCurve {
  std::vector<double> grid;        // strictly increasing p values in [0,1]
  std::vector<double> gamma_hat;
  std::vector<double> std_error;
  std::uint64_t trials = 0;
  LocalRule rule;
  Vertex d = 0;
  std::uint64_t seed = 0;
};

// Estimates gamma at every grid point with shared (x, z, w) per trial, so
// adjacent points differ only through the thresholds and the Lipschitz
// property is testable with little noise. Trials parallelize; grid points
// within a trial never do.
GammaCurve gamma_sweep(const LocalRule& rule, Vertex d, std::vector<double> p_grid,
                       std::uint64_t trials, std::uint64_t seed, unsigned threads = 0);

// CSV with columns p,gamma_hat,std_error,trials,rule,d,r,seed.
std::string gamma_curve_csv(const GammaCurve& curve);

struct PSearchResult {
  double p = 0;
  double gamma_at_p = 0;
  double std_error = 0;
  unsigned iterations = 0;
  unsigned anomalies = 0;  // brackets whose endpoint estimates failed to straddle the target
  bool converged = false;
};

// Bisection for a p with |gamma_hat(p) - target| <= tol, using the same seed
// at every probe so the estimated curve is a fixed function of p. Continuity
// is proven, monotonicity is not: when a bracket stops straddling the target
// the bracket is widened and the anomaly counted instead of looping. tol must
// exceed 3x the endpoint standard error at the given trial count.
PSearchResult find_p_for_gamma(const LocalRule& rule, Vertex d, double target, double tol,
                               std::uint64_t trials, std::uint64_t seed, unsigned threads = 0);

}  // namespace localfactor
