#pragma once

#include <iosfwd>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "wpic/mesh.hpp"

namespace wpic {

inline constexpr double kEpsilon0 = 8.8541878128e-12;  // F/m
inline constexpr double kMu0 = 1.25663706212e-6;       // H/m
inline constexpr double kSpeedOfLight = 299792458.0;   // m/s

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Piecewise-constant material data, one value per face.
struct Materials {
  std::vector<double> epsilon;  // F/m
  std::vector<double> mu;       // H/m

  static Materials uniform(const Mesh& mesh, double epsilon = kEpsilon0, double mu = kMu0);
};

struct HodgeOperators {
  SparseMatrix star_eps;     // N_e x N_e
  SparseMatrix star_mu_inv;  // N_f x N_f, diagonal in 2-D
};

/// ∫ ε W¹_k · W¹_l dA on one face for the local (orientation-free) edge basis,
/// integrated with the symmetric 3-point rule, exact for the quadratic integrand.
Eigen::Matrix3d local_star_eps(const std::array<Vec2, 3>& gradients, double area, double epsilon);

/// Edge–edge Hodge [★ε]. Throws MaterialError on nonpositive ε.
SparseMatrix assemble_star_eps(const Mesh& mesh, const std::vector<double>& eps_per_face);

/// Face–face Hodge [★μ⁻¹] = diag(1 / (μ_f A_f)). Throws MaterialError on nonpositive μ.
SparseMatrix assemble_star_mu_inv(const Mesh& mesh, const std::vector<double>& mu_per_face);

HodgeOperators assemble_hodge(const Mesh& mesh, const Materials& materials);

/// Symmetric to 1e-14 relative and a Cholesky factorization succeeds.
bool verify_spd(const SparseMatrix& m);

/// Matrix Market coordinate dump (1-based triplets).
void write_matrix_market(std::ostream& out, const SparseMatrix& m);
void write_matrix_market(std::ostream& out, const Eigen::SparseMatrix<int, Eigen::RowMajor>& m);

}  // namespace wpic
