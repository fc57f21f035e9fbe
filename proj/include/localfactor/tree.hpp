#pragma once

#include <cstdint>

#include "localfactor/graph.hpp"

namespace localfactor {

// Number of vertices of the canonical rooted tree of degree d and depth r:
// 1 + d((d-1)^r - 1)/(d-2) for d >= 3, 2r+1 for d = 2. Returns 0 on overflow
// past the cap (callers treat that as "too large to materialize").
std::uint64_t tree_size(Vertex d, std::uint32_t r, std::uint64_t cap = (1ull << 32));

// Canonical tree with breadth-first vertex ids: root 0, children of each
// vertex consecutive. depth[v] is the distance from the root.
struct CanonicalTree {
  Vertex d = 0;
  std::uint32_t r = 0;
  Graph graph;
  std::vector<std::uint32_t> depth;

  Vertex root() const { return 0; }
};

// d >= 2 required (the degree-1 tree is undefined past depth 1).
CanonicalTree canonical_tree(Vertex d, std::uint32_t r);

}  // namespace localfactor
