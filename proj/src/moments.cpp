#include "localfactor/moments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace localfactor {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_gamma(double x) {
#if defined(__unix__) || defined(__APPLE__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double log_factorial(std::int64_t k) { return log_gamma(static_cast<double>(k) + 1.0); }

double log_binomial(std::int64_t n, std::int64_t k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

// log of the number of perfect matchings on `points` points (points even).
double log_matchings(std::int64_t points) {
  const std::int64_t half = points / 2;
  return log_factorial(points) - log_factorial(half) -
         static_cast<double>(half) * std::numbers::ln2_v<double>;
}

double log_sum_exp(const std::vector<double>& values) {
  double peak = kNegInf;
  for (double v : values) peak = std::max(peak, v);
  if (peak == kNegInf) return kNegInf;
  double sum = 0;
  for (double v : values) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

// a log a with the 0 log 0 = 0 convention.
double xlogx(double a) { return a > 0.0 ? a * std::log(a) : 0.0; }

// (1-t) log(1-t) through log1p, stable for t near 0.
double one_minus_xlogx(double t) { return (1.0 - t) * std::log1p(-t); }

void validate_common(const OverlapQuery& q) {
  if (q.n < 1) throw std::invalid_argument("overlap query: n must be positive");
  if (q.k < 0) throw std::invalid_argument("overlap query: k must be nonnegative");
  if (q.k > q.m) throw std::invalid_argument("overlap query: k <= m violated");
  if (q.m > q.n) throw std::invalid_argument("overlap query: m <= n violated");
  if (2 * q.m - q.k > q.n) throw std::invalid_argument("overlap query: 2m-k <= n violated");
}

std::int64_t require_integer_degree(double d) {
  const auto di = static_cast<std::int64_t>(d);
  if (static_cast<double>(di) != d || di < 1)
    throw std::invalid_argument("overlap query: regular model needs integer d >= 1");
  return di;
}

}  // namespace

std::string model_name(Model m) { return m == Model::Er ? "er" : "reg"; }

LogExpectation log_expected_overlap_er(const OverlapQuery& q) {
  validate_common(q);
  if (q.l.has_value()) throw std::invalid_argument("overlap query: l applies to the regular model only");
  if (!(q.d > 0.0)) throw std::invalid_argument("overlap query: ER model needs d > 0");
  if (!(q.d < static_cast<double>(q.n)))
    throw std::invalid_argument("overlap query: ER model needs d < n");

  const std::int64_t r = 2 * q.m - q.k;
  const std::int64_t forbidden_slots = r * (r - 1) / 2 - (q.m - q.k) * (q.m - q.k);
  const double log_pairs = log_factorial(q.n) - log_factorial(q.k) -
                           2.0 * log_factorial(q.m - q.k) - log_factorial(q.n - r);
  const double log_q_edge = std::log1p(-q.d / static_cast<double>(q.n));
  LogExpectation out;
  out.query = q;
  out.log_value = log_pairs + static_cast<double>(forbidden_slots) * log_q_edge;
  return out;
}

LogExpectation log_expected_overlap_reg(const OverlapQuery& q) {
  validate_common(q);
  const std::int64_t d = require_integer_degree(q.d);
  if ((q.n * d) % 2 != 0) throw std::invalid_argument("overlap query: n*d must be even");
  if (!q.l.has_value()) throw std::invalid_argument("overlap query: regular model needs l");
  const std::int64_t l = *q.l;
  const std::int64_t r = 2 * q.m - q.k;
  const std::int64_t nd = q.n * d;
  const std::int64_t rd = r * d;
  if (l < 0 || l > d * (q.m - q.k))
    throw std::invalid_argument("overlap query: l out of range [0, d(m-k)]");
  if (rd - 2 * l < 0) throw std::invalid_argument("overlap query: Rd - 2l must be nonnegative");
  if (nd - 2 * rd + 2 * l < 0)
    throw std::invalid_argument("overlap query: nd - 2Rd + 2l must be nonnegative");

  const double log_sets = log_factorial(q.n) - log_factorial(q.k) -
                          2.0 * log_factorial(q.m - q.k) - log_factorial(q.n - r);
  const double log_graphs = 2.0 * log_binomial(d * (q.m - q.k), l) +
                            log_binomial(nd - rd, rd - 2 * l) + log_factorial(l) +
                            log_factorial(rd - 2 * l) + log_matchings(nd - 2 * rd + 2 * l);
  LogExpectation out;
  out.query = q;
  out.log_value = log_sets + log_graphs - log_matchings(nd);
  return out;
}

LogExpectation log_expected_overlap_reg_total(std::int64_t n, std::int64_t d, std::int64_t m,
                                              std::int64_t k) {
  OverlapQuery base;
  base.n = n;
  base.d = static_cast<double>(d);
  base.m = m;
  base.k = k;
  validate_common(base);
  require_integer_degree(base.d);
  if ((n * d) % 2 != 0) throw std::invalid_argument("overlap query: n*d must be even");

  const std::int64_t r = 2 * m - k;
  const std::int64_t lo = std::max<std::int64_t>(0, r * d - n * d / 2);
  const std::int64_t hi = std::min(d * (m - k), r * d / 2);
  std::vector<double> terms;
  for (std::int64_t l = lo; l <= hi; ++l) {
    OverlapQuery q = base;
    q.l = l;
    terms.push_back(log_expected_overlap_reg(q).log_value);
  }
  LogExpectation out;
  out.query = base;
  out.log_value = log_sum_exp(terms);
  return out;
}

RatePoint rate_er(double s, double x, std::int64_t d) {
  if (!(x > 0.0)) throw std::invalid_argument("rate: x must be positive");
  if (!(x <= s)) throw std::invalid_argument("rate: x <= s violated");
  if (!(1.0 - 2.0 * s + x > 0.0)) throw std::invalid_argument("rate: 1-2s+x must be positive");
  const double t = 2.0 * s - x;
  const double dd = static_cast<double>(d);
  RatePoint pt;
  pt.d = d;
  pt.s = s;
  pt.x = x;
  pt.value = -xlogx(x) - 2.0 * xlogx(s - x) - one_minus_xlogx(t) -
             dd * (t * t / 2.0 - (s - x) * (s - x));
  return pt;
}

RatePoint rate_reg(double s, double x, double y, std::int64_t d) {
  if (!(x > 0.0)) throw std::invalid_argument("rate: x must be positive");
  if (!(x <= s)) throw std::invalid_argument("rate: x <= s violated");
  if (!(y >= 0.0 && y <= s - x)) throw std::invalid_argument("rate: y must lie in [0, s-x]");
  if (!(1.0 - 2.0 * s + x > 0.0)) throw std::invalid_argument("rate: 1-2s+x must be positive");
  if (!(1.0 - 4.0 * s + 2.0 * x + 2.0 * y > 0.0))
    throw std::invalid_argument("rate: 1-4s+2x+2y must be positive");
  const double dd = static_cast<double>(d);
  RatePoint pt;
  pt.d = d;
  pt.s = s;
  pt.x = x;
  pt.y = y;
  pt.value = -xlogx(x) - 2.0 * xlogx(s - x) - one_minus_xlogx(2.0 * s - x) +
             2.0 * dd * xlogx(s - x) - dd * xlogx(y) - 2.0 * dd * xlogx(s - x - y) +
             dd * one_minus_xlogx(2.0 * s - x) -
             (dd / 2.0) * one_minus_xlogx(4.0 * s - 2.0 * x - 2.0 * y);
  return pt;
}

double rate_reg_y_term(double s, double x, double y, std::int64_t d) {
  if (!(s - x > 0.0)) throw std::invalid_argument("rate: y-term needs s > x");
  if (!(y >= 0.0)) throw std::invalid_argument("rate: y must be nonnegative");
  const double dd = static_cast<double>(d);
  return dd * y + 2.0 * dd * y * std::log(s - x) - dd * xlogx(y);
}

std::pair<double, double> max_rate_reg_over_y_search(double s, double x, std::int64_t d) {
  const double y_hi = s - x;
  if (!(y_hi >= 0.0)) throw std::invalid_argument("rate: s >= x required");
  const auto value_at = [&](double y) { return rate_reg(s, x, y, d).value; };
  if (y_hi == 0.0) return {0.0, value_at(0.0)};

  // rate_reg is concave in y, so golden-section localizes the maximizer.
  constexpr double kInvPhi = 0.6180339887498949;
  double a = 0.0, b = y_hi;
  double c = b - kInvPhi * (b - a);
  double e = a + kInvPhi * (b - a);
  double fc = value_at(c);
  double fe = value_at(e);
  for (int iter = 0; iter < 120; ++iter) {
    if (fc >= fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - kInvPhi * (b - a);
      fc = value_at(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + kInvPhi * (b - a);
      fe = value_at(e);
    }
  }
  const double y_best = fc >= fe ? c : e;
  return {y_best, value_at(y_best)};
}

RatePoint max_rate_reg_over_y(double s, double x, std::int64_t d) {
  const double y_hi = s - x;
  if (!(y_hi >= 0.0)) throw std::invalid_argument("rate: s >= x required");
  double best_y = 0.0;
  double best_v = rate_reg(s, x, 0.0, d).value;
  const auto offer = [&](double y) {
    const double v = rate_reg(s, x, y, d).value;
    if (v > best_v) {
      best_v = v;
      best_y = y;
    }
  };
  if (y_hi > 0.0) {
    offer(y_hi);
    const double y_star = y_hi * y_hi;  // stationary point of the y-linear part
    if (y_star <= y_hi) offer(y_star);
    const auto [y_search, v_search] = max_rate_reg_over_y_search(s, x, d);
    if (v_search > best_v) {
      best_v = v_search;
      best_y = y_search;
    }
  }
  RatePoint pt;
  pt.d = d;
  pt.s = s;
  pt.x = x;
  pt.y = best_y;
  pt.value = best_v;
  return pt;
}

namespace {

// Rate at the scan point, with x values outside the pair-existence domain
// (1-2s+x <= 0 means no two m-sets with intersection k fit in [n]) counting
// as an exactly-zero expectation.
double window_rate(double s, double x, std::int64_t d, Model model) {
  if (!(1.0 - 2.0 * s + x > 0.0)) return kNegInf;
  return model == Model::Er ? rate_er(s, x, d).value : max_rate_reg_over_y(s, x, d).value;
}

}  // namespace

Window forbidden_window(std::int64_t d, double beta, Model model, const WindowOptions& opts) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("window: beta must be in (0,1]");
  if (d < 3) throw std::invalid_argument("window: d must be at least 3");
  if (opts.half_points < 1) throw std::invalid_argument("window: grid needs at least one point");

  Window w;
  w.d = d;
  w.beta = beta;
  w.model = model;
  const double bound_sq = 2.0 * beta * beta - 1.0;
  w.theoretical_bound = bound_sq > 0.0 ? std::sqrt(bound_sq) : 0.0;
  // Below 1/sqrt(2) the bound does not exist; within 1e-6 of it the bound is
  // under the grid resolution. Both report as empty by theory.
  w.empty_by_theory = bound_sq <= 1e-6;
  if (w.empty_by_theory) return w;

  const double log_d = std::log(static_cast<double>(d));
  const double scale = log_d / static_cast<double>(d);
  const double s = (1.0 + beta) * scale;
  const std::uint32_t half = opts.half_points;
  const double z_cap = std::min(beta, 1.0) * (1.0 - 1e-12);
  const double step = z_cap / static_cast<double>(half);

  const auto rate_at = [&](std::int64_t k) {
    const double zhat = static_cast<double>(k) * step;
    return window_rate(s, (1.0 + zhat) * scale, d, model);
  };

  if (!(rate_at(0) < 0.0)) return w;  // no negative stretch at all
  std::uint32_t reach = 0;
  while (reach < half && rate_at(static_cast<std::int64_t>(reach) + 1) < 0.0 &&
         rate_at(-(static_cast<std::int64_t>(reach) + 1)) < 0.0)
    ++reach;
  w.zhat_max = static_cast<double>(reach) * step;
  return w;
}

std::int64_t min_d_for_window(double beta, double zhat_target, Model model, std::int64_t d_ceiling,
                              const WindowOptions& opts) {
  const double bound_sq = 2.0 * beta * beta - 1.0;
  if (!(beta > 0.0 && beta <= 1.0) || bound_sq <= 1e-6)
    throw std::invalid_argument("min_d_for_window: beta must exceed 1/sqrt(2)");
  if (!(zhat_target > 0.0 && zhat_target < std::sqrt(bound_sq)))
    throw std::invalid_argument("min_d_for_window: target must lie in (0, sqrt(2 beta^2 - 1))");

  const auto covered = [&](std::int64_t d) {
    const Window w = forbidden_window(d, beta, model, opts);
    return w.zhat_max.has_value() && *w.zhat_max >= zhat_target;
  };

  std::int64_t lo = 0;  // largest known uncovered (0 = none tested)
  std::int64_t hi = 3;
  while (!covered(hi)) {
    lo = hi;
    if (hi > d_ceiling / 2)
      throw std::runtime_error("min_d_for_window: no d below the ceiling reaches the target");
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (mid < 3) {
      lo = mid;
      continue;
    }
    if (covered(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string moments_csv_header() { return "model,n,d,m,k,l,log_value\n"; }

std::string moments_csv_row(Model model, const LogExpectation& e) {
  const auto& q = e.query;
  return model_name(model) + "," + std::to_string(q.n) + "," + fmt_double(q.d) + "," +
         std::to_string(q.m) + "," + std::to_string(q.k) + "," +
         (q.l ? std::to_string(*q.l) : std::string{}) + "," + fmt_double(e.log_value) + "\n";
}

std::string rate_csv_header() { return "model,d,beta,zhat,y_star,rate\n"; }

std::string rate_csv_row(Model model, std::int64_t d, double beta, double zhat,
                         const RatePoint& pt) {
  return model_name(model) + "," + std::to_string(d) + "," + fmt_double(beta) + "," +
         fmt_double(zhat) + "," + (pt.y ? fmt_double(*pt.y) : std::string{}) + "," +
         fmt_double(pt.value) + "\n";
}

std::string window_csv_header() { return "model,d,beta,zhat_max,theoretical_bound\n"; }

std::string window_csv_row(const Window& w) {
  return model_name(w.model) + "," + std::to_string(w.d) + "," + fmt_double(w.beta) + "," +
         (w.zhat_max ? fmt_double(*w.zhat_max) : std::string{}) + "," +
         fmt_double(w.theoretical_bound) + "\n";
}

}  // namespace localfactor
