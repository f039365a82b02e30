#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "wpic/mesh.hpp"

namespace wpic {

using Eigen::VectorXd;

/// E(r) = Σ e_k W¹_k(r) over the three edges of `face`, with global edge signs.
Vec2 gather_e(const Mesh& mesh, const VectorXd& e, int face, const Bary& lambda);

/// B_z = b_f / A_f.
double gather_b(const Mesh& mesh, const VectorXd& b, int face);

struct SubSegment {
  int face = -1;
  Bary start;
  Bary end;
};

/// A straight displacement cut at face boundaries. Consecutive pieces carry
/// identical barycentric values on the vertices of the edge they share.
struct SegmentChain {
  std::vector<SubSegment> pieces;
  /// The displacement left the mesh; the last piece ends on a boundary edge.
  bool hit_boundary = false;

  int final_face() const { return pieces.back().face; }
  const Bary& final_lambda() const { return pieces.back().end; }
};

/// Walk the segment r_from → r_to starting in `start_face`. Exit points are
/// handed to the neighbor in barycentric form, so the chain telescopes
/// exactly. Throws WalkEscapedError if the walk fails to terminate.
SegmentChain split_segment(const Mesh& mesh, int start_face, const Vec2& r_from, const Vec2& r_to);

/// (index, value) pairs added into a global array.
using Contributions = std::vector<std::pair<int, double>>;

/// Nodal charges Q λ_i. The first vertex takes Q − Qλ2 − Qλ3 so the three
/// values sum to Q to within rounding of a single subtraction.
void charge_contributions(const Mesh& mesh, double charge, int face, const Bary& lambda,
                          Contributions& out);

/// (Q/Δt) × signed line integral of each local edge form, for every piece.
void current_contributions(const Mesh& mesh, double charge, const SegmentChain& chain, double dt,
                           Contributions& out);

void scatter_charge(const Mesh& mesh, double charge, int face, const Bary& lambda, VectorXd& q);
void scatter_current(const Mesh& mesh, double charge, const SegmentChain& chain, double dt,
                     VectorXd& i);

inline void accumulate(const Contributions& c, VectorXd& target) {
  for (const auto& [index, value] : c) target[index] += value;
}

}  // namespace wpic
