#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace localfactor {

enum class Model { Er, Reg };

std::string model_name(Model m);

// Parameters of a first-moment overlap count: pairs of independent m-sets
// with intersection k in a graph on n vertices; l (regular model only) is the
// number of matching edges between the replica sets of I\J and J\I.
struct OverlapQuery {
  std::int64_t n = 0;
  double d = 0;                     // integer for the regular model
  std::int64_t m = 0;
  std::int64_t k = 0;
  std::optional<std::int64_t> l;
};

struct LogExpectation {
  double log_value = 0;  // natural log; -inf encodes an exactly-zero expectation
  OverlapQuery query;
};

// log E[#pairs] in G(n, d/n):
//   log n!/(k!((m-k)!)^2(n-2m+k)!) + [C(2m-k,2) - (m-k)^2] log(1 - d/n),
// evaluated through log-gamma. Requires 0 < d < n and no l.
LogExpectation log_expected_overlap_er(const OverlapQuery& q);

// log E[#pairs with cross-edge count l] in the configuration model, from the
// counting product: multinomial(n; k, m-k, m-k, n-R) C(md-kd, l)^2
// C(nd-Rd, Rd-2l) l! (Rd-2l)! M(nd-2Rd+2l) / M(nd), with R = 2m-k and M(2j)
// the number of perfect matchings on 2j points. Requires nd even and the
// l-range constraints.
LogExpectation log_expected_overlap_reg(const OverlapQuery& q);

// log-sum-exp of log_expected_overlap_reg over all feasible l.
LogExpectation log_expected_overlap_reg_total(std::int64_t n, std::int64_t d, std::int64_t m,
                                              std::int64_t k);

struct RatePoint {
  std::int64_t d = 0;
  double s = 0;
  double x = 0;
  std::optional<double> y;
  double value = 0;
};

// Exponential rate of the expected ER overlap count at set density s and
// overlap density x:
//   x log(1/x) + 2(s-x) log(1/(s-x)) + (1-2s+x) log(1/(1-2s+x))
//     - d((2s-x)^2/2 - (s-x)^2),
// with the 0 log 0 = 0 convention at x = s. Requires 0 < x <= s, 1-2s+x > 0.
RatePoint rate_er(double s, double x, std::int64_t d);

// Regular-model rate at cross-edge density y in [0, s-x]:
//   -x log x - 2(s-x)log(s-x) - (1-2s+x)log(1-2s+x) + 2d(s-x)log(s-x)
//     - d y log y - 2d(s-x-y)log(s-x-y) + d(1-2s+x)log(1-2s+x)
//     - (d/2)(1-4s+2x+2y)log(1-4s+2x+2y).
// Boundary terms at y = 0, y = s-x drop; requires 1-4s+2x+2y > 0.
RatePoint rate_reg(double s, double x, double y, std::int64_t d);

// The y-linear part d y + 2 d y log(s-x) - d y log y whose stationary point
// is y* = (s-x)^2 with value d(s-x)^2.
double rate_reg_y_term(double s, double x, double y, std::int64_t d);

// Concave golden-section maximizer of rate_reg over y in [0, s-x], without
// the analytic candidate. Used as the independent check of y*.
std::pair<double, double> max_rate_reg_over_y_search(double s, double x, std::int64_t d);

// Global maximum of rate_reg over feasible y: analytic candidate (s-x)^2,
// both endpoints, and the refinement search.
RatePoint max_rate_reg_over_y(double s, double x, std::int64_t d);

struct WindowOptions {
  std::uint32_t half_points = 1000;  // grid is 2*half_points + 1 symmetric points
};

// Forbidden overlap window at set density s = (1+beta) log d / d. The scan
// walks zhat over a symmetric grid, puts x = (1+zhat) log d / d, and takes
// the largest zhat_max with a negative rate throughout [-zhat_max, zhat_max].
// The asymptotic bound sqrt(2 beta^2 - 1) applies for beta above 1/sqrt(2);
// below (or within 1e-6 of it, where the bound falls under grid resolution)
// the window is reported empty by theory.
struct Window {
  std::int64_t d = 0;
  double beta = 0;
  Model model = Model::Er;
  std::optional<double> zhat_max;  // empty when no negative stretch exists
  double theoretical_bound = 0;
  bool empty_by_theory = false;
};

Window forbidden_window(std::int64_t d, double beta, Model model,
                        const WindowOptions& opts = {});

// Smallest d on a doubling-then-bisect schedule whose window reaches
// zhat_target. Throws if none exists below d_ceiling.
std::int64_t min_d_for_window(double beta, double zhat_target, Model model,
                              std::int64_t d_ceiling = (std::int64_t{1} << 40),
                              const WindowOptions& opts = {});

// CSV rows per External interface formats.
std::string moments_csv_header();                                     // model,n,d,m,k,l,log_value
std::string moments_csv_row(Model model, const LogExpectation& e);
std::string rate_csv_header();                                        // model,d,beta,zhat,y_star,rate
std::string rate_csv_row(Model model, std::int64_t d, double beta, double zhat,
                         const RatePoint& pt);
std::string window_csv_header();                                      // model,d,beta,zhat_max,theoretical_bound
std::string window_csv_row(const Window& w);

}  // namespace localfactor
