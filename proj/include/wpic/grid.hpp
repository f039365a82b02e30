#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "wpic/mesh.hpp"

namespace wpic {

/// Rectangular point lattice triangulated cell by cell. Used by the mesh
/// generator tool and by tests; not a general mesher.
struct GridSpec {
  int nx = 10;
  int ny = 10;
  double x0 = -0.5, x1 = 0.5;
  double y0 = -0.5, y1 = 0.5;
  /// Interior vertex displacement as a fraction of the local spacing.
  double jitter = 0.0;
  /// Pick each cell diagonal at random instead of alternating.
  bool random_diagonals = false;
  /// 0 keeps uniform spacing; >0 concentrates lines toward the center.
  double grading = 0.0;
  /// Shuffle global vertex numbering (exercises orientation handling).
  bool shuffle_ids = false;
  std::uint64_t seed = 1;
};

Mesh make_grid_mesh(const GridSpec& spec);

/// Text format with 1-based ids, readable by parse_mesh.
void write_mesh(std::ostream& out, const Mesh& mesh);
void save_mesh(const std::string& path, const Mesh& mesh);

}  // namespace wpic
