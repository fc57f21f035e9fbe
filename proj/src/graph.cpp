#include "localfactor/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "localfactor/rng.hpp"

namespace localfactor {

namespace {
constexpr std::uint64_t kStreamStructure = 0;
}

Graph Graph::from_edges(Vertex n, std::vector<Edge> edges) {
  for (auto& [u, v] : edges) {
    if (u == v) throw std::invalid_argument("graph edge is a self-loop");
    if (u > v) std::swap(u, v);
    if (v >= n) throw std::invalid_argument("graph edge endpoint out of range");
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw std::invalid_argument("duplicate edge in simple graph");

  Graph g;
  g.n_ = n;
  g.edge_count_ = edges.size();
  std::vector<std::uint64_t> degree(n, 0);
  for (const auto& [u, v] : edges) {
    ++degree[u];
    ++degree[v];
  }
  g.offsets_.assign(n + 1, 0);
  for (Vertex u = 0; u < n; ++u) g.offsets_[u + 1] = g.offsets_[u] + degree[u];
  g.neighbors_.resize(2 * edges.size());
  std::vector<std::uint64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const auto& [u, v] : edges) {
    g.neighbors_[cursor[u]++] = v;
    g.neighbors_[cursor[v]++] = u;
  }
  for (Vertex u = 0; u < n; ++u)
    std::sort(g.neighbors_.begin() + g.offsets_[u], g.neighbors_.begin() + g.offsets_[u + 1]);
  return g;
}

bool Graph::has_edge(Vertex u, Vertex v) const {
  const auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (Vertex u = 0; u < n_; ++u)
    for (Vertex v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

RegularSample generate_regular(Vertex n, Vertex d, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_regular: n must be positive");
  if (d < 1) throw std::invalid_argument("generate_regular: d must be positive");
  const std::uint64_t replicas = std::uint64_t{n} * d;
  if (replicas % 2 != 0) throw std::invalid_argument("generate_regular: n*d must be even");

  std::vector<std::uint32_t> perm(replicas);
  for (std::uint64_t i = 0; i < replicas; ++i) perm[i] = static_cast<std::uint32_t>(i);
  StreamRng rng = substream(seed, kStreamStructure);
  for (std::uint64_t i = replicas - 1; i > 0; --i) {
    const std::uint64_t j = rng.next_below(i + 1);
    std::swap(perm[i], perm[j]);
  }

  RegularSample sample;
  sample.n = n;
  sample.d = d;
  sample.matching.reserve(replicas / 2);
  std::vector<Edge> edges;
  edges.reserve(replicas / 2);
  for (std::uint64_t i = 0; i < replicas; i += 2) {
    const std::uint32_t a = std::min(perm[i], perm[i + 1]);
    const std::uint32_t b = std::max(perm[i], perm[i + 1]);
    sample.matching.emplace_back(a, b);
    const Vertex u = a / d;
    const Vertex v = b / d;
    if (u == v) {
      ++sample.loop_count;
    } else {
      edges.emplace_back(u, v);
    }
  }
  std::sort(edges.begin(), edges.end());
  const auto last = std::unique(edges.begin(), edges.end());
  sample.multi_edge_count = static_cast<std::uint64_t>(edges.end() - last);
  edges.erase(last, edges.end());
  sample.graph = Graph::from_edges(n, std::move(edges));
  return sample;
}

RegularSample generate_regular_defect_free(Vertex n, Vertex d, std::uint64_t seed,
                                           unsigned max_attempts) {
  for (unsigned attempt = 0; attempt < max_attempts; ++attempt) {
    RegularSample s = generate_regular(n, d, derive_stream(seed, attempt));
    if (s.defect_free()) return s;
  }
  throw std::runtime_error("generate_regular_defect_free: no defect-free sample within attempt budget");
}

Graph generate_er(Vertex n, double d, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_er: n must be positive");
  if (!(d >= 0)) throw std::invalid_argument("generate_er: d must be nonnegative");
  if (d > static_cast<double>(n)) throw std::invalid_argument("generate_er: d must not exceed n");
  const double p = d / static_cast<double>(n);
  const std::uint64_t slots = std::uint64_t{n} * (n - 1) / 2;
  std::vector<Edge> edges;

  if (p >= 1.0) {
    edges.reserve(slots);
    for (Vertex u = 0; u + 1 < n; ++u)
      for (Vertex v = u + 1; v < n; ++v) edges.emplace_back(u, v);
    return Graph::from_edges(n, std::move(edges));
  }
  if (p > 0.0 && slots > 0) {
    StreamRng rng = substream(seed, kStreamStructure);
    const double log_q = std::log1p(-p);
    // Slot indices enumerate pairs (u,v), u < v, lexicographically; the walk
    // advances by geometric gaps so work is proportional to the edge count.
    std::uint64_t slot = 0;  // next candidate slot
    Vertex row = 0;
    std::uint64_t row_start = 0;
    for (;;) {
      const double u01 = 1.0 - rng.next_unit();  // in (0, 1]
      const double gap = std::floor(std::log(u01) / log_q);
      if (gap >= static_cast<double>(slots - slot)) break;
      slot += static_cast<std::uint64_t>(gap);
      while (slot >= row_start + (n - 1 - row)) {
        row_start += n - 1 - row;
        ++row;
      }
      const Vertex v = static_cast<Vertex>(row + 1 + (slot - row_start));
      edges.emplace_back(row, v);
      if (++slot >= slots) break;
    }
  }
  return Graph::from_edges(n, std::move(edges));
}

NeighborhoodView neighborhood(const Graph& g, Vertex u, std::uint32_t r,
                              std::span<const double> labels) {
  if (u >= g.vertex_count()) throw std::invalid_argument("neighborhood: vertex id out of range");
  if (!labels.empty() && labels.size() != g.vertex_count())
    throw std::invalid_argument("neighborhood: labels must cover all vertices");

  NeighborhoodView view;
  view.root = u;
  view.radius = r;

  std::unordered_map<Vertex, std::uint32_t> dist;
  dist.reserve(16);
  dist.emplace(u, 0);
  std::vector<Vertex> frontier{u};
  std::vector<Vertex> next;
  for (std::uint32_t depth = 0; depth < r && !frontier.empty(); ++depth) {
    next.clear();
    for (Vertex a : frontier)
      for (Vertex b : g.neighbors(a))
        if (dist.emplace(b, depth + 1).second) next.push_back(b);
    frontier.swap(next);
  }

  view.vertices.reserve(dist.size());
  for (const auto& [v, dv] : dist) view.vertices.emplace_back(v, dv);
  std::sort(view.vertices.begin(), view.vertices.end(),
            [](const auto& a, const auto& b) {
              return a.second != b.second ? a.second < b.second : a.first < b.first;
            });

  for (const auto& [a, da] : view.vertices)
    for (Vertex b : g.neighbors(a))
      if (a < b && dist.count(b)) view.induced_edges.emplace_back(a, b);
  std::sort(view.induced_edges.begin(), view.induced_edges.end());

  if (!labels.empty()) {
    std::vector<double> sub;
    sub.reserve(view.vertices.size());
    for (const auto& [v, dv] : view.vertices) sub.push_back(labels[v]);
    view.labels = std::move(sub);
  }
  return view;
}

bool is_canonical_tree(const NeighborhoodView& view, Vertex d) {
  const std::size_t nv = view.vertices.size();
  if (view.radius == 0) return nv == 1 && view.induced_edges.empty();
  if (view.induced_edges.size() + 1 != nv) return false;  // connected by construction, so acyclic

  std::unordered_map<Vertex, std::uint32_t> degree;
  degree.reserve(nv);
  for (const auto& [a, b] : view.induced_edges) {
    ++degree[a];
    ++degree[b];
  }
  for (const auto& [v, dist] : view.vertices) {
    const std::uint32_t deg = degree.count(v) ? degree.at(v) : 0;
    if (dist < view.radius) {
      if (deg != d) return false;  // root and internal vertices
    } else {
      if (deg != 1) return false;  // leaves, all at distance exactly r
    }
  }
  return true;
}

double tree_fraction(const Graph& g, Vertex d, std::uint32_t r) {
  const Vertex n = g.vertex_count();
  if (n == 0) return 0.0;
  std::uint64_t hits = 0;
  for (Vertex u = 0; u < n; ++u)
    if (is_canonical_tree(neighborhood(g, u, r), d)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(n);
}

namespace {

std::string fmt_u64(std::uint64_t v) { return std::to_string(v); }

std::string fmt_d_value(double d) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

}  // namespace

std::string format_edge_list(const Graph& g, const GraphFileMeta& meta) {
  if (meta.model != "reg" && meta.model != "er")
    throw std::invalid_argument("edge list: model must be reg or er");
  std::string out = "# localfactor-graph v1 n=" + fmt_u64(g.vertex_count()) +
                    " model=" + meta.model + " d=" + fmt_d_value(meta.d) +
                    " seed=" + fmt_u64(meta.seed) + " loops=" + fmt_u64(meta.loops) +
                    " multi=" + fmt_u64(meta.multi) + "\n";
  for (Vertex u = 0; u < g.vertex_count(); ++u)
    for (Vertex v : g.neighbors(u))
      if (u < v) out += fmt_u64(u) + " " + fmt_u64(v) + "\n";
  return out;
}

void write_edge_list(const std::string& path, const Graph& g, const GraphFileMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << format_edge_list(g, meta);
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

std::uint64_t parse_u64_field(const std::string& token, const std::string& prefix) {
  if (token.rfind(prefix, 0) != 0)
    throw std::invalid_argument("edge list header: expected " + prefix + "<value>, got '" + token + "'");
  const std::string value = token.substr(prefix.size());
  if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument("edge list header: bad integer in '" + token + "'");
  return std::stoull(value);
}

}  // namespace

std::pair<Graph, GraphFileMeta> parse_edge_list(const std::string& text) {
  if (text.empty() || text.back() != '\n')
    throw std::invalid_argument("edge list: file must be newline-terminated");

  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::vector<std::string> tokens;
  for (std::string t; hs >> t;) tokens.push_back(t);
  if (tokens.size() != 9 || tokens[0] != "#" || tokens[1] != "localfactor-graph" || tokens[2] != "v1")
    throw std::invalid_argument("edge list: malformed header");

  GraphFileMeta meta;
  const std::uint64_t n64 = parse_u64_field(tokens[3], "n=");
  if (tokens[4].rfind("model=", 0) != 0)
    throw std::invalid_argument("edge list header: expected model=<reg|er>");
  meta.model = tokens[4].substr(6);
  if (meta.model != "reg" && meta.model != "er")
    throw std::invalid_argument("edge list header: model must be reg or er");
  if (tokens[5].rfind("d=", 0) != 0) throw std::invalid_argument("edge list header: expected d=<value>");
  try {
    std::size_t pos = 0;
    meta.d = std::stod(tokens[5].substr(2), &pos);
    if (pos != tokens[5].size() - 2) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw std::invalid_argument("edge list header: bad d value");
  }
  meta.seed = parse_u64_field(tokens[6], "seed=");
  meta.loops = parse_u64_field(tokens[7], "loops=");
  meta.multi = parse_u64_field(tokens[8], "multi=");
  if (n64 > 0xFFFFFFFFull) throw std::invalid_argument("edge list header: n too large");
  const Vertex n = static_cast<Vertex>(n64);

  std::vector<Edge> edges;
  Edge prev{0, 0};
  bool have_prev = false;
  for (std::string line; std::getline(in, line);) {
    const auto space = line.find(' ');
    if (space == std::string::npos || space == 0 || space + 1 >= line.size())
      throw std::invalid_argument("edge list: malformed edge line '" + line + "'");
    const std::string a = line.substr(0, space);
    const std::string b = line.substr(space + 1);
    if (a.find_first_not_of("0123456789") != std::string::npos ||
        b.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("edge list: malformed edge line '" + line + "'");
    const std::uint64_t u = std::stoull(a);
    const std::uint64_t v = std::stoull(b);
    if (u >= v) throw std::invalid_argument("edge list: edges must satisfy u < v");
    if (v >= n) throw std::invalid_argument("edge list: vertex id out of range");
    const Edge e{static_cast<Vertex>(u), static_cast<Vertex>(v)};
    if (have_prev && !(prev < e))
      throw std::invalid_argument("edge list: edges must be sorted lexicographically without duplicates");
    prev = e;
    have_prev = true;
    edges.push_back(e);
  }
  return {Graph::from_edges(n, std::move(edges)), meta};
}

std::pair<Graph, GraphFileMeta> read_edge_list(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_edge_list(buf.str());
}

}  // namespace localfactor
