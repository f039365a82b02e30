#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace wpic {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
/// Barycentric triple (λ1, λ2, λ3) relative to a face's local vertex order.
using Bary = Eigen::Vector3d;
using IntSparse = Eigen::SparseMatrix<int, Eigen::RowMajor>;

/// Local edge k of a face joins local vertices kLocalEdge[k][0] < kLocalEdge[k][1].
/// Ascending pairs: e1 = (1,2), e2 = (1,3), e3 = (2,3).
inline constexpr std::array<std::array<int, 2>, 3> kLocalEdge{{{0, 1}, {0, 2}, {1, 2}}};

/// Local edge opposite local vertex k.
constexpr int opposite_edge(int local_vertex) { return 2 - local_vertex; }
/// Local vertex opposite local edge k.
constexpr int opposite_vertex(int local_edge) { return 2 - local_edge; }

/// Unstructured triangular mesh with derived topology.
///
/// Faces are stored counter-clockwise, rotated so the smallest global vertex
/// index comes first. Edges are oriented from the lower to the higher global
/// vertex index. Immutable after construction.
struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::array<int, 3>> faces;
  std::vector<double> areas;

  /// Global edge for each local edge (see kLocalEdge).
  std::vector<std::array<int, 3>> face_edges;
  /// +1 when the local ascending pair follows the global edge direction, else -1.
  std::vector<std::array<int, 3>> face_edge_sign;
  /// Adjacent faces per edge; the second entry is -1 on the boundary.
  std::vector<std::array<int, 2>> edge_faces;
  /// Neighbor across each local edge, -1 on the boundary.
  std::vector<std::array<int, 3>> face_neighbors;
  /// Constant barycentric gradients ∇λ1, ∇λ2, ∇λ3 per face (1/m).
  std::vector<std::array<Vec2, 3>> gradients;
  /// Containment tolerance on each barycentric coordinate, scaled so that it
  /// corresponds to 1e-12 of the face diameter in distance.
  std::vector<std::array<double, 3>> inside_tol;

  std::vector<bool> boundary_edge;
  std::vector<bool> boundary_vertex;

  /// Number of holes declared by the mesh file; the Euler check uses V - E + F = 1 - holes.
  int holes = 0;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }

  Vec2 vertex(int face, int local) const { return vertices[faces[face][local]]; }
  int euler_characteristic() const { return num_vertices() - num_edges() + num_faces(); }
  /// Centroid of a face.
  Vec2 centroid(int face) const;
  /// Longest edge of a face.
  double diameter(int face) const;
};

/// Incidence matrices in {-1, 0, +1}.
struct IncidenceMatrices {
  /// Face x edge discrete curl: +1 where the edge runs along the CCW traversal of the face.
  IntSparse curl;
  /// Vertex x edge dual-grid divergence: +1 where the edge leaves the vertex.
  IntSparse div_dual;
};

/// Build a mesh from 0-based triangles. Vertex order inside each triangle is
/// not trusted and is normalized. Throws TopologyError.
Mesh build_mesh(std::vector<Vec2> vertices, const std::vector<std::array<int, 3>>& triangles,
                int holes = 0);

/// Parse the whitespace-delimited mesh text format. Throws ParseError / TopologyError.
Mesh parse_mesh(std::istream& in);
Mesh load_mesh(const std::string& path);

/// Checks the structural invariants; returns a description of the first
/// violation, or an empty string.
std::string check_mesh(const Mesh& mesh);

IncidenceMatrices build_incidence(const Mesh& mesh);

/// Barycentric coordinates of `point` in `face`. λ2 and λ3 are signed
/// sub-triangle area ratios; λ1 closes the partition of unity.
Bary barycentric(const Mesh& mesh, int face, const Vec2& point);

/// Cartesian point for a barycentric triple in `face`.
Vec2 to_cartesian(const Mesh& mesh, int face, const Bary& lambda);

bool contains(const Mesh& mesh, int face, const Bary& lambda);

struct LocateResult {
  int face = -1;
  int steps = 0;
};

/// Adjacency walk from `start_face`, crossing the edge opposite the most
/// negative barycentric coordinate. Throws WalkEscapedError.
LocateResult locate(const Mesh& mesh, int start_face, const Vec2& point);

struct SegmentExit {
  double s = 1.0;
  std::optional<int> local_edge;
};

/// Where the straight path λ_from -> λ_to (both in `face` coordinates) leaves
/// the face. Returns {1, none} when it stays inside up to and including s = 1.
/// `skip_local_edge` excludes the edge the path entered through.
SegmentExit segment_exit(const Mesh& mesh, int face, const Bary& from, const Bary& to,
                         int skip_local_edge = -1);
SegmentExit segment_exit(const Mesh& mesh, int face, const Vec2& from, const Vec2& to);

}  // namespace wpic
