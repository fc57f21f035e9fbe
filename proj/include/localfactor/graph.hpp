#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace localfactor {

using Vertex = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;  // normalized u < v

// Immutable simple undirected graph in CSR form, neighbor lists sorted.
class Graph {
 public:
  Graph() = default;

  // edges must be loop-free; duplicates are rejected. Normalizes (u,v) order.
  static Graph from_edges(Vertex n, std::vector<Edge> edges);

  Vertex vertex_count() const { return n_; }
  std::uint64_t edge_count() const { return edge_count_; }

  std::span<const Vertex> neighbors(Vertex u) const {
    return {neighbors_.data() + offsets_[u], neighbors_.data() + offsets_[u + 1]};
  }
  Vertex degree(Vertex u) const { return offsets_[u + 1] - offsets_[u]; }
  bool has_edge(Vertex u, Vertex v) const;

  // Edges as sorted (u,v) pairs with u < v.
  std::vector<Edge> edges() const;

  bool operator==(const Graph& other) const = default;

 private:
  Vertex n_ = 0;
  std::uint64_t edge_count_ = 0;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<Vertex> neighbors_;
};

// One configuration-model draw: the uniform matching on the n*d replicas,
// the projected simple graph, and the projection defect counts.
struct RegularSample {
  Graph graph;
  Vertex n = 0;
  Vertex d = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> matching;  // replica pairs
  std::uint64_t loop_count = 0;
  std::uint64_t multi_edge_count = 0;

  bool defect_free() const { return loop_count == 0 && multi_edge_count == 0; }
};

struct NeighborhoodView {
  Vertex root = 0;
  std::uint32_t radius = 0;
  std::vector<std::pair<Vertex, std::uint32_t>> vertices;  // (id, distance), sorted by (distance, id)
  std::vector<Edge> induced_edges;                         // within the ball, u < v, sorted
  std::optional<std::vector<double>> labels;               // aligned with vertices
};

// Uniform matching on the n*d replicas (Fisher-Yates pairing), projected to a
// simple graph. Loops are dropped and parallel edges collapsed; both are
// counted. Deterministic given seed.
RegularSample generate_regular(Vertex n, Vertex d, std::uint64_t seed);

// Re-samples with streams derived from (seed, attempt) until the draw has no
// loops or parallel edges. Convenience only, not a uniformity guarantee.
RegularSample generate_regular_defect_free(Vertex n, Vertex d, std::uint64_t seed,
                                           unsigned max_attempts = 10000);

// G(n, d/n): each of the C(n,2) edge slots present independently with
// probability d/n, sampled by geometric skipping. Deterministic given seed.
Graph generate_er(Vertex n, double d, std::uint64_t seed);

// Breadth-first ball of radius r around u with the induced edge set.
// labels, when given, must cover all vertices of g.
NeighborhoodView neighborhood(const Graph& g, Vertex u, std::uint32_t r,
                              std::span<const double> labels = {});

// True iff the view is isomorphic to the canonical tree of degree d and depth
// equal to the view radius: acyclic, root degree d, internal degrees d, all
// leaves at distance exactly r.
bool is_canonical_tree(const NeighborhoodView& view, Vertex d);

// Fraction of vertices whose radius-r ball is the canonical tree.
double tree_fraction(const Graph& g, Vertex d, std::uint32_t r);

// Edge-list text format:
//   # localfactor-graph v1 n=<n> model=<reg|er> d=<d> seed=<seed> loops=<c> multi=<c>
// followed by one "u v" line per edge, u < v, sorted, 0-indexed.
struct GraphFileMeta {
  std::string model;  // "reg" or "er"
  double d = 0;
  std::uint64_t seed = 0;
  std::uint64_t loops = 0;
  std::uint64_t multi = 0;
};

void write_edge_list(const std::string& path, const Graph& g, const GraphFileMeta& meta);
std::string format_edge_list(const Graph& g, const GraphFileMeta& meta);
// Rejects malformed headers, unsorted or duplicate rows, loops, and
// out-of-range vertices.
std::pair<Graph, GraphFileMeta> read_edge_list(const std::string& path);
std::pair<Graph, GraphFileMeta> parse_edge_list(const std::string& text);

}  // namespace localfactor
