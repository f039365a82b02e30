#include "wpic/hodge.hpp"

#include <cmath>
#include <ostream>

#include <Eigen/SparseCholesky>

#include "wpic/error.hpp"
#include "wpic/whitney.hpp"

namespace wpic {

Materials Materials::uniform(const Mesh& mesh, double epsilon, double mu) {
  return {std::vector<double>(mesh.num_faces(), epsilon), std::vector<double>(mesh.num_faces(), mu)};
}

Eigen::Matrix3d local_star_eps(const std::array<Vec2, 3>& gradients, double area, double epsilon) {
  static const std::array<Bary, 3> kPoints{Bary(2.0 / 3, 1.0 / 6, 1.0 / 6),
                                           Bary(1.0 / 6, 2.0 / 3, 1.0 / 6),
                                           Bary(1.0 / 6, 1.0 / 6, 2.0 / 3)};
  Eigen::Matrix3d local = Eigen::Matrix3d::Zero();
  for (const Bary& lambda : kPoints) {
    Eigen::Matrix<double, 2, 3> w;
    for (int k = 0; k < 3; ++k) w.col(k) = whitney::eval_w1<double>(gradients, lambda, k);
    local.noalias() += w.transpose() * w;
  }
  local *= epsilon * area / 3.0;
  return local;
}

SparseMatrix assemble_star_eps(const Mesh& mesh, const std::vector<double>& eps_per_face) {
  if (static_cast<int>(eps_per_face.size()) != mesh.num_faces())
    throw MaterialError("permittivity array does not match the face count");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(9 * mesh.faces.size());
  // Triplets are pushed in face order; setFromTriplets sums duplicates in
  // insertion order, so the result is independent of how faces were computed.
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (!(eps_per_face[f] > 0)) throw MaterialError("nonpositive permittivity on face " + std::to_string(f + 1));
    const Eigen::Matrix3d local = local_star_eps(mesh.gradients[f], mesh.areas[f], eps_per_face[f]);
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l)
        triplets.emplace_back(mesh.face_edges[f][k], mesh.face_edges[f][l],
                              mesh.face_edge_sign[f][k] * mesh.face_edge_sign[f][l] * local(k, l));
  }
  SparseMatrix m(mesh.num_edges(), mesh.num_edges());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

SparseMatrix assemble_star_mu_inv(const Mesh& mesh, const std::vector<double>& mu_per_face) {
  if (static_cast<int>(mu_per_face.size()) != mesh.num_faces())
    throw MaterialError("permeability array does not match the face count");
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.faces.size());
  for (int f = 0; f < mesh.num_faces(); ++f) {
    if (!(mu_per_face[f] > 0)) throw MaterialError("nonpositive permeability on face " + std::to_string(f + 1));
    // W² = 1/A on its own face, so ∫ (1/μ) W² W² dA = 1 / (μ A).
    triplets.emplace_back(f, f, 1.0 / (mu_per_face[f] * mesh.areas[f]));
  }
  SparseMatrix m(mesh.num_faces(), mesh.num_faces());
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

HodgeOperators assemble_hodge(const Mesh& mesh, const Materials& materials) {
  return {assemble_star_eps(mesh, materials.epsilon), assemble_star_mu_inv(mesh, materials.mu)};
}

bool verify_spd(const SparseMatrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  double scale = 0.0;
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  if (!(scale > 0) || !std::isfinite(scale)) return false;
  const SparseMatrix asym = SparseMatrix(m.transpose()) - m;
  for (int k = 0; k < asym.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(asym, k); it; ++it)
      if (std::abs(it.value()) > 1e-14 * scale) return false;
  Eigen::SimplicialLLT<SparseMatrix> llt(m);
  return llt.info() == Eigen::Success;
}

namespace {

template <typename Matrix>
void write_market(std::ostream& out, const Matrix& m, const char* field) {
  out << "%%MatrixMarket matrix coordinate " << field << " general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  const auto precision = out.precision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (typename Matrix::InnerIterator it(m, k); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
  out.precision(precision);
}

}  // namespace

void write_matrix_market(std::ostream& out, const SparseMatrix& m) { write_market(out, m, "real"); }

void write_matrix_market(std::ostream& out, const Eigen::SparseMatrix<int, Eigen::RowMajor>& m) {
  write_market(out, m, "integer");
}

}  // namespace wpic
