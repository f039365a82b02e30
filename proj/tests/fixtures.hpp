#pragma once

#include <cstdint>
#include <sstream>
#include <string>

#include "wpic/grid.hpp"
#include "wpic/mesh.hpp"

namespace fixture {

/// Unit square split along the diagonal (0,0)-(1,1).
inline wpic::Mesh two_triangles() {
  return wpic::build_mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{{0, 1, 2}}, {{0, 2, 3}}});
}

inline wpic::Mesh single_triangle() {
  return wpic::build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}});
}

/// Jittered grid with random diagonals and shuffled numbering.
inline wpic::Mesh random_mesh(std::uint64_t seed, int n = 6) {
  wpic::GridSpec g;
  g.nx = n;
  g.ny = n + static_cast<int>(seed % 3);
  g.jitter = 0.4;
  g.random_diagonals = true;
  g.shuffle_ids = true;
  g.seed = seed;
  return wpic::make_grid_mesh(g);
}

inline wpic::Mesh parse(const std::string& text) {
  std::istringstream in(text);
  return wpic::parse_mesh(in);
}

}  // namespace fixture
