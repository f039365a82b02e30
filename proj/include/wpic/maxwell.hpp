#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include "wpic/hodge.hpp"
#include "wpic/mesh.hpp"

namespace wpic {

using Eigen::VectorXd;

/// Discrete field and source arrays with their leap-frog time levels.
/// After a full step: e at n, b at n - 1/2, i at n - 1/2, q at n.
struct FieldState {
  VectorXd e;  // V, per edge
  VectorXd b;  // Wb, per face
  VectorXd i;  // A, per edge
  VectorXd q;  // C, per vertex
  double e_level = 0.0;
  double b_level = -0.5;

  static FieldState zeros(const Mesh& mesh);
  bool finite() const;
};

struct SolverConfig {
  double dt = 0.0;
  double cg_rel_tol = 1e-12;
  int cg_max_iter = 2000;
  double courant_safety = 0.9;

  void validate() const;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// b ← b − Δt C e
void step_b(const SparseMatrix& curl, const VectorXd& e, double dt, VectorXd& b);

/// Leap-frog Maxwell stepper on a fixed mesh.
///
/// Boundary edges carry perfect-electric-conductor conditions: their e DoFs
/// stay zero and are removed from the mass-matrix solve. The e update is
/// solved in increment form, [★ε]_II Δe_I = Δt (Cᵀ[★μ⁻¹]b − i)_I, with Jacobi
/// preconditioned CG warm-started from the previous increment.
class MaxwellStepper {
 public:
  MaxwellStepper(const Mesh& mesh, const IncidenceMatrices& incidence, const HodgeOperators& hodge,
                 const SolverConfig& config);

  /// b^{n-1/2} → b^{n+1/2} using e^n.
  void step_b(FieldState& state) const;
  /// e^n → e^{n+1} using b^{n+1/2} and i^{n+1/2}. Throws SolverError.
  SolveStats step_e(FieldState& state);

  /// Δt C e, the b increment one step_b would subtract.
  VectorXd curl_increment(const VectorXd& e) const;

  const SolverConfig& config() const { return config_; }
  void set_tolerance(double rel_tol);
  const std::vector<int>& interior_edges() const { return interior_; }
  const SparseMatrix& curl() const { return curl_; }

 private:
  SolverConfig config_;
  SparseMatrix curl_;
  SparseMatrix curl_t_star_mu_;  // Cᵀ [★μ⁻¹]
  std::vector<int> interior_;
  SparseMatrix star_eps_interior_;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg_;
  VectorXd last_increment_;
};

/// Rows/columns of `m` restricted to the listed indices.
SparseMatrix restrict_symmetric(const SparseMatrix& m, const std::vector<int>& keep);
std::vector<int> interior_edge_list(const Mesh& mesh);

struct CourantEstimate {
  double dt_c = 0.0;
  double lambda_max = 0.0;
  int iterations = 0;
};

/// dt_c = 2 / √λ_max, λ_max the largest generalized eigenvalue of
/// Cᵀ[★μ⁻¹]C against [★ε] on the interior edges. Power iteration with a
/// Cholesky inner solve; throws SolverError if it does not converge.
CourantEstimate estimate_courant(const Mesh& mesh, const IncidenceMatrices& incidence,
                                 const HodgeOperators& hodge, double rel_tol = 1e-8,
                                 int max_iter = 50000);

}  // namespace wpic
