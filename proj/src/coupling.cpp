#include "localfactor/coupling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "localfactor/parallel.hpp"
#include "localfactor/rng.hpp"

namespace localfactor {

namespace {

constexpr std::uint64_t kStreamX = 1;
constexpr std::uint64_t kStreamZ = 2;
constexpr std::uint64_t kStreamW = 3;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

CoupledDecoration sample_coupled(Vertex n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("sample_coupled: p must be in [0,1]");
  CoupledDecoration cd;
  cd.p = p;
  cd.x.labels.resize(n);
  cd.y.labels.resize(n);
  cd.reuse_mask.resize(n);
  const StreamRng rx = substream(seed, kStreamX);
  const StreamRng rz = substream(seed, kStreamZ);
  const StreamRng rw = substream(seed, kStreamW);
  for (Vertex v = 0; v < n; ++v) {
    const double x = rx.unit_at(v);
    const bool reuse = rw.unit_at(v) <= p;
    cd.x.labels[v] = x;
    cd.reuse_mask[v] = reuse;
    cd.y.labels[v] = reuse ? x : rz.unit_at(v);
  }
  return cd;
}

GammaEstimate estimate_gamma(const LocalRule& rule, Vertex d, double p, std::uint64_t trials,
                             std::uint64_t seed, unsigned threads) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("estimate_gamma: p must be in [0,1]");
  if (trials < 1) throw std::invalid_argument("estimate_gamma: trials must be at least 1");
  const CanonicalTree tree = detail::sampling_tree(rule, d);
  const std::uint64_t ball = detail::rule_ball_size(rule, d);

  std::atomic<std::uint64_t> both{0};
  parallel_for(trials, threads, [&](std::uint64_t t) {
    thread_local std::vector<double> x, y;
    x.resize(ball);
    y.resize(ball);
    const std::uint64_t trial_key = derive_stream(seed, t);
    const StreamRng rx = substream(trial_key, kStreamX);
    const StreamRng rz = substream(trial_key, kStreamZ);
    const StreamRng rw = substream(trial_key, kStreamW);
    for (std::uint64_t v = 0; v < ball; ++v) {
      x[v] = rx.unit_at(v);
      y[v] = rw.unit_at(v) <= p ? x[v] : rz.unit_at(v);
    }
    if (detail::root_decision_on_tree(rule, tree, x) &&
        detail::root_decision_on_tree(rule, tree, y))
      both.fetch_add(1, std::memory_order_relaxed);
  });

  GammaEstimate est;
  est.trials = trials;
  est.gamma_hat = static_cast<double>(both.load()) / static_cast<double>(trials);
  est.std_error = std::sqrt(est.gamma_hat * (1.0 - est.gamma_hat) / static_cast<double>(trials));
  return est;
}

OverlapResult overlap_experiment(const LocalRule& rule, Vertex n, Vertex d, double p,
                                 std::uint64_t seed) {
  const RegularSample sample = generate_regular(n, d, seed);
  const CoupledDecoration cd = sample_coupled(n, p, seed);
  const RunResult run_x = run_rule(rule, sample.graph, cd.x);
  const RunResult run_y = run_rule(rule, sample.graph, cd.y);

  OverlapResult out;
  out.size_x = run_x.members.size();
  out.size_y = run_y.members.size();
  out.tie_count = run_x.tie_count + run_y.tie_count;
  out.loop_count = sample.loop_count;
  out.multi_edge_count = sample.multi_edge_count;
  std::vector<Vertex> common;
  std::set_intersection(run_x.members.begin(), run_x.members.end(), run_y.members.begin(),
                        run_y.members.end(), std::back_inserter(common));
  out.intersection = common.size();
  return out;
}

GammaCurve gamma_sweep(const LocalRule& rule, Vertex d, std::vector<double> p_grid,
                       std::uint64_t trials, std::uint64_t seed, unsigned threads) {
  if (p_grid.empty()) throw std::invalid_argument("gamma_sweep: grid must be nonempty");
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    if (!(p_grid[i] >= 0.0 && p_grid[i] <= 1.0))
      throw std::invalid_argument("gamma_sweep: grid values must be in [0,1]");
    if (i > 0 && !(p_grid[i - 1] < p_grid[i]))
      throw std::invalid_argument("gamma_sweep: grid must be strictly increasing");
  }
  if (trials < 1) throw std::invalid_argument("gamma_sweep: trials must be at least 1");
  const CanonicalTree tree = detail::sampling_tree(rule, d);
  const std::uint64_t ball = detail::rule_ball_size(rule, d);
  const std::size_t points = p_grid.size();

  std::vector<std::atomic<std::uint64_t>> both(points);
  for (auto& c : both) c.store(0);

  parallel_for(trials, threads, [&](std::uint64_t t) {
    thread_local std::vector<double> x, z, w, y;
    x.resize(ball);
    z.resize(ball);
    w.resize(ball);
    y.resize(ball);
    const std::uint64_t trial_key = derive_stream(seed, t);
    const StreamRng rx = substream(trial_key, kStreamX);
    const StreamRng rz = substream(trial_key, kStreamZ);
    const StreamRng rw = substream(trial_key, kStreamW);
    for (std::uint64_t v = 0; v < ball; ++v) {
      x[v] = rx.unit_at(v);
      z[v] = rz.unit_at(v);
      w[v] = rw.unit_at(v);
    }
    const int dx = detail::root_decision_on_tree(rule, tree, x);
    if (!dx) return;  // gamma needs both halves; x does not depend on p
    for (std::size_t i = 0; i < points; ++i) {
      const double p = p_grid[i];
      for (std::uint64_t v = 0; v < ball; ++v) y[v] = w[v] <= p ? x[v] : z[v];
      if (detail::root_decision_on_tree(rule, tree, y))
        both[i].fetch_add(1, std::memory_order_relaxed);
    }
  });

  GammaCurve curve;
  curve.grid = std::move(p_grid);
  curve.trials = trials;
  curve.rule = rule;
  curve.d = d;
  curve.seed = seed;
  curve.gamma_hat.resize(points);
  curve.std_error.resize(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double g = static_cast<double>(both[i].load()) / static_cast<double>(trials);
    curve.gamma_hat[i] = g;
    curve.std_error[i] = std::sqrt(g * (1.0 - g) / static_cast<double>(trials));
  }
  return curve;
}

std::string gamma_curve_csv(const GammaCurve& curve) {
  std::string out = "p,gamma_hat,std_error,trials,rule,d,r,seed\n";
  const std::string rule_field = "\"" + curve.rule.serialize() + "\"";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    out += fmt_double(curve.grid[i]) + "," + fmt_double(curve.gamma_hat[i]) + "," +
           fmt_double(curve.std_error[i]) + "," + std::to_string(curve.trials) + "," + rule_field +
           "," + std::to_string(curve.d) + "," + std::to_string(curve.rule.radius) + "," +
           std::to_string(curve.seed) + "\n";
  }
  return out;
}

PSearchResult find_p_for_gamma(const LocalRule& rule, Vertex d, double target, double tol,
                               std::uint64_t trials, std::uint64_t seed, unsigned threads) {
  if (!(tol > 0)) throw std::invalid_argument("find_p_for_gamma: tol must be positive");
  const auto estimate = [&](double p) { return estimate_gamma(rule, d, p, trials, seed, threads); };

  const GammaEstimate at0 = estimate(0.0);
  const GammaEstimate at1 = estimate(1.0);
  const double se_cap = std::max(at0.std_error, at1.std_error);
  if (tol <= 3.0 * se_cap)
    throw std::invalid_argument(
        "find_p_for_gamma: tol below statistical resolution (3x std_error at this trial count)");
  const double lo_gamma = std::min(at0.gamma_hat, at1.gamma_hat);
  const double hi_gamma = std::max(at0.gamma_hat, at1.gamma_hat);
  if (target < lo_gamma - tol || target > hi_gamma + tol)
    throw std::invalid_argument("find_p_for_gamma: target outside achievable range [gamma(0), gamma(1)]");

  PSearchResult best;
  const auto consider = [&](double p, const GammaEstimate& est) {
    if (!best.iterations || std::abs(est.gamma_hat - target) < std::abs(best.gamma_at_p - target)) {
      best.p = p;
      best.gamma_at_p = est.gamma_hat;
      best.std_error = est.std_error;
    }
    ++best.iterations;
  };
  consider(1.0, at1);
  consider(0.0, at0);
  if (std::abs(at1.gamma_hat - target) <= tol) {
    best.p = 1.0;
    best.gamma_at_p = at1.gamma_hat;
    best.std_error = at1.std_error;
    best.converged = true;
    return best;
  }
  if (std::abs(at0.gamma_hat - target) <= tol) {
    best.p = 0.0;
    best.gamma_at_p = at0.gamma_hat;
    best.std_error = at0.std_error;
    best.converged = true;
    return best;
  }

  const auto straddles = [target](double a, double b) {
    return std::min(a, b) <= target && target <= std::max(a, b);
  };
  double lo = 0.0, hi = 1.0;
  double g_lo = at0.gamma_hat, g_hi = at1.gamma_hat;
  for (unsigned iter = 0; iter < 64; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const GammaEstimate gm = estimate(mid);
    consider(mid, gm);
    if (std::abs(gm.gamma_hat - target) <= tol) {
      best.p = mid;
      best.gamma_at_p = gm.gamma_hat;
      best.std_error = gm.std_error;
      best.converged = true;
      return best;
    }
    if (straddles(g_lo, gm.gamma_hat)) {
      hi = mid;
      g_hi = gm.gamma_hat;
    } else if (straddles(gm.gamma_hat, g_hi)) {
      lo = mid;
      g_lo = gm.gamma_hat;
    } else {
      // Continuity is proven, monotonicity is not: the bracket stopped
      // straddling the target. Widen and record the anomaly.
      ++best.anomalies;
      const double width = hi - lo;
      lo = std::max(0.0, lo - width);
      hi = std::min(1.0, hi + width);
      const GammaEstimate nlo = estimate(lo);
      const GammaEstimate nhi = estimate(hi);
      consider(lo, nlo);
      consider(hi, nhi);
      g_lo = nlo.gamma_hat;
      g_hi = nhi.gamma_hat;
      if (lo == 0.0 && hi == 1.0 && !straddles(g_lo, g_hi)) return best;  // not converged
    }
  }
  return best;
}

}  // namespace localfactor
