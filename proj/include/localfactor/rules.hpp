#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "localfactor/graph.hpp"
#include "localfactor/tree.hpp"

namespace localfactor {

enum class RuleFamily { LocalMin, MultiRoundGreedy, CustomTable };

// Descriptor of an r-local independence rule.
//
// local-min (radius 1): u is selected iff its label is strictly below every
// neighbor label.
//
// multi-round-greedy with T rounds (radius T): [0,1] splits into T equal
// intervals; u joins in round t iff its label falls in interval t, no
// neighbor joined in an earlier round, and no neighbor has a smaller label in
// the same interval.
//
// custom-table (radius 1): labels are discretized into `buckets` equal
// buckets and the table marks which buckets are eligible; u is selected iff
// its bucket is eligible and its label is the strict minimum among eligible
// neighbors. The all-eligible table is exactly local-min.
//
// Label ties within a comparison are broken toward the smaller vertex id and
// counted (they have probability zero under continuous labels).
// Every family outputs an independent set on every graph and labeling.
struct LocalRule {
  RuleFamily family = RuleFamily::LocalMin;
  std::uint32_t radius = 1;
  std::uint32_t rounds = 1;            // multi-round-greedy
  std::vector<bool> accept;            // custom-table eligibility per bucket

  static LocalRule local_min();
  static LocalRule multi_round_greedy(std::uint32_t rounds);
  static LocalRule custom_table(std::vector<bool> accept);

  // Text form: rule=<family>;r=<radius>;params=<k=v,...>
  std::string serialize() const;
  static LocalRule parse(const std::string& descriptor);

  bool operator==(const LocalRule&) const = default;
};

// Per-vertex labels in [0,1].
struct Decoration {
  std::vector<double> labels;
};

// i.i.d. uniform labels; label v is a pure function of (seed, v).
Decoration sample_decoration(Vertex n, std::uint64_t seed);

struct DensityEstimate {
  double alpha_hat = 0;
  std::uint64_t trials = 0;
  double std_error = 0;
};

struct RunResult {
  std::vector<Vertex> members;   // sorted
  std::uint64_t tie_count = 0;   // adjacent pairs with exactly equal labels
};

// Decision of the rule at u, computed from neighborhood(g, u, radius) and
// the labels inside it only.
int evaluate_rule(const LocalRule& rule, Vertex u, const Graph& g, const Decoration& x);

// Decisions for all vertices at once (the production path for graph runs).
std::vector<std::uint8_t> decide_all(const LocalRule& rule, const Graph& g,
                                     std::span<const double> labels);

// All selected vertices. The output is checked to be an independent set on
// every call; a violation throws (it would mean a broken rule).
RunResult run_rule(const LocalRule& rule, const Graph& g, const Decoration& x);

// Monte Carlo estimate of the probability the rule selects the root of the
// canonical tree of degree d (sampled one level deeper than the rule radius)
// under i.i.d. uniform labels. Deterministic given seed at any thread count.
DensityEstimate estimate_density(const LocalRule& rule, Vertex d, std::uint64_t trials,
                                 std::uint64_t seed, unsigned threads = 0);

// Re-randomizes all labels outside B(u, radius) `trials` times and reports
// whether the decision at u ever changes. The decision is taken from the
// full-graph run, so this genuinely verifies the implementation is r-local.
using DecideFn = std::function<int(const Graph&, Vertex, std::span<const double>)>;
bool locality_check(const LocalRule& rule, const Graph& g, Vertex u, const Decoration& x,
                    std::uint64_t trials, std::uint64_t seed);
bool locality_check(const DecideFn& decide, std::uint32_t radius, const Graph& g, Vertex u,
                    const Decoration& x, std::uint64_t trials, std::uint64_t seed);

struct TrialRecord {
  std::uint64_t set_size = 0;
  std::uint64_t tie_count = 0;
  std::uint32_t non_tree_count = 0;  // vertices whose radius-r ball is not the canonical tree
};

struct MeasureRun {
  std::vector<TrialRecord> records;
  double mean_density = 0;    // mean |I| / n
  double variance_per_n = 0;  // sample variance of |I|, divided by n
  Vertex n = 0;
  Vertex d = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

// Fresh regular sample + decoration per trial; runs the rule and records
// set size, ties, and the non-tree vertex count at the rule radius.
MeasureRun measure_run(const LocalRule& rule, Vertex n, Vertex d, std::uint64_t trials,
                       std::uint64_t seed, unsigned threads = 0);

namespace detail {

// Vertices of the canonical tree the rule actually reads: the BFS prefix
// covering the root's radius ball.
std::uint64_t rule_ball_size(const LocalRule& rule, Vertex d);

// Root decision from labels of the BFS prefix [0, rule_ball_size).
int root_decision_on_tree(const LocalRule& rule, const CanonicalTree& tree,
                          std::span<const double> prefix_labels);

// The tree estimate_density / estimate_gamma sample on: canonical tree one
// level past the rule radius. Throws if it cannot be materialized.
CanonicalTree sampling_tree(const LocalRule& rule, Vertex d);

}  // namespace detail

}  // namespace localfactor
