#include "wpic/deposit.hpp"

#include <algorithm>

#include "wpic/error.hpp"
#include "wpic/whitney.hpp"

namespace wpic {

Vec2 gather_e(const Mesh& mesh, const VectorXd& e, int face, const Bary& lambda) {
  Vec2 field = Vec2::Zero();
  for (int k = 0; k < 3; ++k) {
    const int edge = mesh.face_edges[face][k];
    field += (mesh.face_edge_sign[face][k] * e[edge]) *
             whitney::eval_w1<double>(mesh.gradients[face], lambda, k);
  }
  return field;
}

double gather_b(const Mesh& mesh, const VectorXd& b, int face) {
  return b[face] * whitney::eval_w2(mesh.areas[face]);
}

namespace {

// Point where the path crosses local edge `edge`, snapped onto that edge.
Bary exit_point(const Bary& from, const Bary& to, double s, int edge) {
  Bary p = from + s * (to - from);
  p[opposite_vertex(edge)] = 0.0;
  p = p.cwiseMax(0.0);
  return p / p.sum();
}

// Same point expressed in the neighbor's vertex order.
Bary transfer(const Mesh& mesh, int face, int neighbor, const Bary& lambda) {
  Bary out = Bary::Zero();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      if (mesh.faces[neighbor][a] == mesh.faces[face][b]) out[a] = lambda[b];
  return out;
}

int local_edge_of(const Mesh& mesh, int face, int global_edge) {
  const auto& fe = mesh.face_edges[face];
  return static_cast<int>(std::find(fe.begin(), fe.end(), global_edge) - fe.begin());
}

}  // namespace

SegmentChain split_segment(const Mesh& mesh, int start_face, const Vec2& r_from, const Vec2& r_to) {
  SegmentChain chain;
  int face = start_face;
  Bary from = barycentric(mesh, face, r_from);
  int skip = -1;
  const int guard = 4 * mesh.num_faces() + 8;
  for (int step = 0; step < guard; ++step) {
    const Bary to = barycentric(mesh, face, r_to);
    const SegmentExit ex = segment_exit(mesh, face, from, to, skip);
    if (!ex.local_edge) {
      chain.pieces.push_back({face, from, to});
      return chain;
    }
    const int edge = *ex.local_edge;
    const int neighbor = mesh.face_neighbors[face][edge];
    if (neighbor < 0) {
      // An endpoint within the containment tolerance of the wall stays put.
      if (contains(mesh, face, to)) {
        chain.pieces.push_back({face, from, to});
        return chain;
      }
      chain.pieces.push_back({face, from, exit_point(from, to, ex.s, edge)});
      chain.hit_boundary = true;
      return chain;
    }
    const Bary crossing = exit_point(from, to, ex.s, edge);
    chain.pieces.push_back({face, from, crossing});
    from = transfer(mesh, face, neighbor, crossing);
    skip = local_edge_of(mesh, neighbor, mesh.face_edges[face][edge]);
    face = neighbor;
  }
  throw WalkEscapedError("segment walk did not terminate", face);
}

void charge_contributions(const Mesh& mesh, double charge, int face, const Bary& lambda,
                          Contributions& out) {
  const double q2 = charge * lambda[1];
  const double q3 = charge * lambda[2];
  out.emplace_back(mesh.faces[face][0], charge - q2 - q3);
  out.emplace_back(mesh.faces[face][1], q2);
  out.emplace_back(mesh.faces[face][2], q3);
}

void current_contributions(const Mesh& mesh, double charge, const SegmentChain& chain, double dt,
                           Contributions& out) {
  const double scale = charge / dt;
  for (const SubSegment& piece : chain.pieces) {
    const Eigen::Vector3d flux = whitney::line_integrals_w1<double>(piece.start, piece.end);
    for (int k = 0; k < 3; ++k)
      out.emplace_back(mesh.face_edges[piece.face][k],
                       mesh.face_edge_sign[piece.face][k] * scale * flux[k]);
  }
}

void scatter_charge(const Mesh& mesh, double charge, int face, const Bary& lambda, VectorXd& q) {
  Contributions c;
  charge_contributions(mesh, charge, face, lambda, c);
  accumulate(c, q);
}

void scatter_current(const Mesh& mesh, double charge, const SegmentChain& chain, double dt,
                     VectorXd& i) {
  Contributions c;
  current_contributions(mesh, charge, chain, dt, c);
  accumulate(c, i);
}

}  // namespace wpic
