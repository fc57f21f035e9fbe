#include "localfactor/tree.hpp"

#include <stdexcept>

namespace localfactor {

std::uint64_t tree_size(Vertex d, std::uint32_t r, std::uint64_t cap) {
  if (d < 1) return 0;
  if (r == 0) return 1;
  if (d == 1) return r == 1 ? 2 : 0;
  std::uint64_t total = 1;
  std::uint64_t level = d;  // vertices at depth 1
  for (std::uint32_t depth = 1; depth <= r; ++depth) {
    if (level > cap - total) return 0;
    total += level;
    if (depth < r) {
      if (level > cap / (d - 1)) return 0;
      level *= d - 1;
    }
  }
  return total;
}

CanonicalTree canonical_tree(Vertex d, std::uint32_t r) {
  if (d < 2) throw std::invalid_argument("canonical_tree: d must be at least 2");
  const std::uint64_t size = tree_size(d, r);
  if (size == 0) throw std::invalid_argument("canonical_tree: tree too large to materialize");

  CanonicalTree tree;
  tree.d = d;
  tree.r = r;
  tree.depth.resize(size, 0);
  std::vector<Edge> edges;
  edges.reserve(size - 1);
  Vertex next_id = 1;
  for (Vertex v = 0; v < size && next_id < size; ++v) {
    const std::uint32_t dv = tree.depth[v];
    if (dv >= r) continue;
    const Vertex child_count = (v == 0) ? d : d - 1;
    for (Vertex c = 0; c < child_count; ++c) {
      const Vertex child = next_id++;
      tree.depth[child] = dv + 1;
      edges.emplace_back(v, child);
    }
  }
  tree.graph = Graph::from_edges(static_cast<Vertex>(size), std::move(edges));
  return tree;
}

}  // namespace localfactor
