#include "wpic/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "wpic/error.hpp"
#include "wpic/whitney.hpp"

namespace wpic {

namespace {

constexpr double kContainmentTol = 1e-12;

std::string face_label(int f) { return "triangle " + std::to_string(f + 1); }

}  // namespace

Vec2 Mesh::centroid(int face) const {
  return (vertex(face, 0) + vertex(face, 1) + vertex(face, 2)) / 3.0;
}

double Mesh::diameter(int face) const {
  const Vec2 a = vertex(face, 0), b = vertex(face, 1), c = vertex(face, 2);
  return std::max({(b - a).norm(), (c - a).norm(), (c - b).norm()});
}

Mesh build_mesh(std::vector<Vec2> vertices, const std::vector<std::array<int, 3>>& triangles,
                int holes) {
  Mesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.holes = holes;
  const int nv = mesh.num_vertices();
  if (triangles.empty()) throw TopologyError("mesh has no triangles");
  if (holes < 0) throw TopologyError("negative hole count");

  std::set<std::array<int, 3>> seen;
  std::vector<bool> referenced(nv, false);
  mesh.faces.reserve(triangles.size());
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    std::array<int, 3> tri = triangles[t];
    const int f = static_cast<int>(t);
    for (int v : tri) {
      if (v < 0 || v >= nv)
        throw TopologyError(face_label(f) + " references unknown vertex " + std::to_string(v + 1));
      referenced[v] = true;
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw TopologyError(face_label(f) + " repeats a vertex");

    std::array<int, 3> key = tri;
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second) throw TopologyError(face_label(f) + " is a duplicate");

    const Vec2& a = mesh.vertices[tri[0]];
    const Vec2& b = mesh.vertices[tri[1]];
    const Vec2& c = mesh.vertices[tri[2]];
    double area = whitney::signed_area<double>(a, b, c);
    const double scale = std::max({(b - a).squaredNorm(), (c - a).squaredNorm(),
                                   (c - b).squaredNorm()});
    if (!(std::abs(area) > 1e-14 * scale)) throw TopologyError(face_label(f) + " has zero area");
    if (area < 0) {
      std::swap(tri[1], tri[2]);
      area = -area;
    }
    // Rotate so the smallest global index leads; keeps the CCW cycle.
    const int lead = static_cast<int>(std::min_element(tri.begin(), tri.end()) - tri.begin());
    std::rotate(tri.begin(), tri.begin() + lead, tri.end());
    mesh.faces.push_back(tri);
    mesh.areas.push_back(area);
  }
  for (int v = 0; v < nv; ++v)
    if (!referenced[v])
      throw TopologyError("vertex " + std::to_string(v + 1) + " is not used by any triangle");

  // Edges sorted by (low, high) so numbering does not depend on face order.
  struct Incidence {
    int lo, hi, face, local;
  };
  std::vector<Incidence> incid;
  incid.reserve(3 * mesh.faces.size());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int a = mesh.faces[f][kLocalEdge[k][0]];
      const int b = mesh.faces[f][kLocalEdge[k][1]];
      incid.push_back({std::min(a, b), std::max(a, b), f, k});
    }
  }
  std::sort(incid.begin(), incid.end(), [](const Incidence& x, const Incidence& y) {
    return std::tie(x.lo, x.hi, x.face) < std::tie(y.lo, y.hi, y.face);
  });

  const int nf = mesh.num_faces();
  mesh.face_edges.assign(nf, {-1, -1, -1});
  mesh.face_edge_sign.assign(nf, {1, 1, 1});
  mesh.face_neighbors.assign(nf, {-1, -1, -1});
  for (std::size_t s = 0; s < incid.size();) {
    std::size_t t = s;
    while (t < incid.size() && incid[t].lo == incid[s].lo && incid[t].hi == incid[s].hi) ++t;
    if (t - s > 2)
      throw TopologyError("edge (" + std::to_string(incid[s].lo + 1) + ", " +
                          std::to_string(incid[s].hi + 1) + ") is shared by more than two triangles");
    const int e = mesh.num_edges();
    mesh.edges.push_back({incid[s].lo, incid[s].hi});
    std::array<int, 2> adj{-1, -1};
    for (std::size_t u = s; u < t; ++u) {
      const auto& in = incid[u];
      adj[u - s] = in.face;
      mesh.face_edges[in.face][in.local] = e;
      mesh.face_edge_sign[in.face][in.local] =
          mesh.faces[in.face][kLocalEdge[in.local][0]] == in.lo ? 1 : -1;
    }
    if (t - s == 2) {
      // Both faces are CCW, so a shared edge must be traversed in opposite directions.
      const auto& p = incid[s];
      const auto& q = incid[s + 1];
      const int ccw_p = mesh.face_edge_sign[p.face][p.local] * (p.local == 1 ? -1 : 1);
      const int ccw_q = mesh.face_edge_sign[q.face][q.local] * (q.local == 1 ? -1 : 1);
      if (ccw_p == ccw_q)
        throw TopologyError(face_label(p.face) + " and " + face_label(q.face) + " overlap");
      mesh.face_neighbors[p.face][p.local] = q.face;
      mesh.face_neighbors[q.face][q.local] = p.face;
    }
    mesh.edge_faces.push_back(adj);
    s = t;
  }

  mesh.boundary_edge.assign(mesh.num_edges(), false);
  mesh.boundary_vertex.assign(nv, false);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edge_faces[e][1] < 0) {
      mesh.boundary_edge[e] = true;
      mesh.boundary_vertex[mesh.edges[e][0]] = true;
      mesh.boundary_vertex[mesh.edges[e][1]] = true;
    }
  }

  mesh.gradients.resize(nf);
  mesh.inside_tol.resize(nf);
  for (int f = 0; f < nf; ++f) {
    mesh.gradients[f] =
        whitney::barycentric_gradients<double>(mesh.vertex(f, 0), mesh.vertex(f, 1), mesh.vertex(f, 2));
    const double diam = mesh.diameter(f);
    for (int k = 0; k < 3; ++k) {
      // |∇λ_k| = 1 / height_k
      mesh.inside_tol[f][k] = kContainmentTol * diam * mesh.gradients[f][k].norm();
    }
  }

  if (mesh.euler_characteristic() != 1 - holes)
    throw TopologyError("Euler check failed: V - E + F = " +
                        std::to_string(mesh.euler_characteristic()) + ", expected " +
                        std::to_string(1 - holes));
  return mesh;
}

Mesh parse_mesh(std::istream& in) {
  std::vector<std::pair<int, std::string>> lines;
  int holes = 0;
  std::string raw;
  for (int lineno = 1; std::getline(in, raw); ++lineno) {
    const auto hash = raw.find('#');
    if (hash != std::string::npos) {
      std::istringstream directive(raw.substr(hash + 1));
      std::string word;
      if (directive >> word && word == "holes") {
        if (!(directive >> holes) || holes < 0)
          throw ParseError("line " + std::to_string(lineno) + ": bad holes directive");
      }
      raw.erase(hash);
    }
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    lines.emplace_back(lineno, raw);
  }

  std::size_t cursor = 0;
  auto next = [&](const char* what) -> std::istringstream {
    if (cursor >= lines.size()) throw ParseError(std::string("unexpected end of file, expected ") + what);
    return std::istringstream(lines[cursor++].second);
  };
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError("line " + std::to_string(lines[cursor - 1].first) + ": " + msg);
  };

  long nv = 0, nd = 0;
  {
    auto ls = next("vertex header");
    if (!(ls >> nv >> nd)) throw fail("expected 'NV ND'");
    if (nv < 3) throw fail("need at least 3 vertices");
    if (nd != 2) throw fail("only 2-D meshes are supported");
  }
  std::vector<Vec2> vertices(nv);
  std::vector<bool> have(nv, false);
  for (long k = 0; k < nv; ++k) {
    auto ls = next("vertex line");
    long id;
    double x, y;
    if (!(ls >> id >> x >> y)) throw fail("expected 'id x y'");
    if (id < 1 || id > nv) throw fail("vertex id " + std::to_string(id) + " out of range");
    if (have[id - 1]) throw fail("duplicate vertex id " + std::to_string(id));
    if (!std::isfinite(x) || !std::isfinite(y)) throw fail("non-finite coordinate");
    have[id - 1] = true;
    vertices[id - 1] = Vec2(x, y);
  }
  long nf = 0, per = 0;
  {
    auto ls = next("triangle header");
    if (!(ls >> nf >> per)) throw fail("expected 'NF 3'");
    if (per != 3) throw fail("triangles must have 3 vertices");
    if (nf < 1) throw fail("need at least one triangle");
  }
  std::vector<std::array<int, 3>> tris(nf);
  std::vector<bool> have_face(nf, false);
  for (long k = 0; k < nf; ++k) {
    auto ls = next("triangle line");
    long id, a, b, c;
    if (!(ls >> id >> a >> b >> c)) throw fail("expected 'id v1 v2 v3'");
    if (id < 1 || id > nf) throw fail("triangle id " + std::to_string(id) + " out of range");
    if (have_face[id - 1]) throw fail("duplicate triangle id " + std::to_string(id));
    for (long v : {a, b, c})
      if (v < 1 || v > nv) throw fail("vertex reference " + std::to_string(v) + " out of range");
    have_face[id - 1] = true;
    tris[id - 1] = {static_cast<int>(a - 1), static_cast<int>(b - 1), static_cast<int>(c - 1)};
  }
  if (cursor != lines.size()) {
    ++cursor;
    throw fail("trailing content after triangle block");
  }
  return build_mesh(std::move(vertices), tris, holes);
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file '" + path + "'");
  try {
    return parse_mesh(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const TopologyError& e) {
    throw TopologyError(path + ": " + e.what());
  }
}

std::string check_mesh(const Mesh& mesh) {
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (!(mesh.areas[f] > 0)) return face_label(f) + " has nonpositive area";
    const double a = whitney::signed_area<double>(mesh.vertex(f, 0), mesh.vertex(f, 1), mesh.vertex(f, 2));
    if (!(a > 0)) return face_label(f) + " is not counter-clockwise";
  }
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edges[e][0] >= mesh.edges[e][1]) return "edge " + std::to_string(e) + " is not ascending";
    const int n = mesh.edge_faces[e][1] < 0 ? 1 : 2;
    if (mesh.boundary_edge[e] != (n == 1)) return "edge " + std::to_string(e) + " boundary flag mismatch";
  }
  if (mesh.euler_characteristic() != 1 - mesh.holes) return "Euler relation violated";
  return {};
}

IncidenceMatrices build_incidence(const Mesh& mesh) {
  // CCW traversal runs along local edges e1 and e3 and against e2.
  constexpr std::array<int, 3> kTraversal{1, -1, 1};
  std::vector<Eigen::Triplet<int>> curl;
  curl.reserve(3 * mesh.faces.size());
  for (int f = 0; f < mesh.num_faces(); ++f)
    for (int k = 0; k < 3; ++k)
      curl.emplace_back(f, mesh.face_edges[f][k], kTraversal[k] * mesh.face_edge_sign[f][k]);

  std::vector<Eigen::Triplet<int>> div;
  div.reserve(2 * mesh.edges.size());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    div.emplace_back(mesh.edges[e][0], e, 1);
    div.emplace_back(mesh.edges[e][1], e, -1);
  }

  IncidenceMatrices inc;
  inc.curl.resize(mesh.num_faces(), mesh.num_edges());
  inc.curl.setFromTriplets(curl.begin(), curl.end());
  inc.div_dual.resize(mesh.num_vertices(), mesh.num_edges());
  inc.div_dual.setFromTriplets(div.begin(), div.end());
  return inc;
}

Bary barycentric(const Mesh& mesh, int face, const Vec2& p) {
  const Vec2 x1 = mesh.vertex(face, 0);
  const Vec2 u = mesh.vertex(face, 1) - x1;
  const Vec2 w = mesh.vertex(face, 2) - x1;
  const Vec2 d = p - x1;
  const double two_area = u.x() * w.y() - u.y() * w.x();
  const double l2 = (d.x() * w.y() - d.y() * w.x()) / two_area;
  const double l3 = (u.x() * d.y() - u.y() * d.x()) / two_area;
  return Bary(1.0 - l2 - l3, l2, l3);
}

Vec2 to_cartesian(const Mesh& mesh, int face, const Bary& lambda) {
  return lambda[0] * mesh.vertex(face, 0) + lambda[1] * mesh.vertex(face, 1) +
         lambda[2] * mesh.vertex(face, 2);
}

bool contains(const Mesh& mesh, int face, const Bary& lambda) {
  for (int k = 0; k < 3; ++k)
    if (lambda[k] < -mesh.inside_tol[face][k]) return false;
  return true;
}

namespace {

// Straight walk from the start face centroid; always terminates.
LocateResult locate_by_segment(const Mesh& mesh, int start_face, const Vec2& point, int steps) {
  int face = start_face;
  Bary from = barycentric(mesh, face, mesh.centroid(face));
  int skip = -1;
  for (int guard = 0; guard <= 4 * mesh.num_faces() + 8; ++guard) {
    const Bary to = barycentric(mesh, face, point);
    const SegmentExit ex = segment_exit(mesh, face, from, to, skip);
    if (!ex.local_edge) return {face, steps};
    const int edge = *ex.local_edge;
    const int nb = mesh.face_neighbors[face][edge];
    if (nb < 0) throw WalkEscapedError("point lies outside the mesh", face);
    Bary exit_point = from + ex.s * (to - from);
    exit_point[opposite_vertex(edge)] = 0.0;
    Bary next = Bary::Zero();
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (mesh.faces[nb][a] == mesh.faces[face][b]) next[a] = exit_point[b];
    const int ge = mesh.face_edges[face][edge];
    skip = static_cast<int>(std::find(mesh.face_edges[nb].begin(), mesh.face_edges[nb].end(), ge) -
                            mesh.face_edges[nb].begin());
    from = next;
    face = nb;
    ++steps;
  }
  throw WalkEscapedError("point location did not terminate", face);
}

}  // namespace

LocateResult locate(const Mesh& mesh, int start_face, const Vec2& point) {
  int face = start_face;
  const int budget = 64;
  for (int steps = 0; steps < budget; ++steps) {
    const Bary lambda = barycentric(mesh, face, point);
    if (contains(mesh, face, lambda)) return {face, steps};
    int worst = 0;
    for (int k = 1; k < 3; ++k)
      if (lambda[k] < lambda[worst]) worst = k;
    const int nb = mesh.face_neighbors[face][opposite_edge(worst)];
    if (nb < 0) throw WalkEscapedError("point lies outside the mesh", face);
    face = nb;
  }
  // Greedy walks can cycle on strongly non-Delaunay meshes.
  return locate_by_segment(mesh, face, point, budget);
}

SegmentExit segment_exit(const Mesh& mesh, int face, const Bary& from, const Bary& to,
                         int skip_local_edge) {
  const Bary d = to - from;
  double best_s = std::numeric_limits<double>::infinity();
  int best_edge = -1;
  for (int k = 0; k < 3; ++k) {
    const int edge = opposite_edge(k);
    if (edge == skip_local_edge || !(d[k] < 0)) continue;
    const double s = std::max(from[k], 0.0) / -d[k];
    if (s < best_s) {
      best_s = s;
      best_edge = edge;
    } else if (s == best_s && mesh.face_edges[face][edge] < mesh.face_edges[face][best_edge]) {
      best_edge = edge;
    }
  }
  if (best_edge < 0 || best_s >= 1.0) return {1.0, std::nullopt};
  return {best_s, best_edge};
}

SegmentExit segment_exit(const Mesh& mesh, int face, const Vec2& from, const Vec2& to) {
  return segment_exit(mesh, face, barycentric(mesh, face, from), barycentric(mesh, face, to));
}

}  // namespace wpic
