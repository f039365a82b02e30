#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "wpic/hodge.hpp"
#include "wpic/mesh.hpp"

namespace wpic {

using Eigen::VectorXd;

/// (q_next − q_prev)/Δt + S̃ i, per vertex (C/s).
VectorXd continuity_residual(const VectorXd& q_prev, const VectorXd& q_next, const VectorXd& i,
                             const IntSparse& div_dual, double dt);

/// S̃ [★ε] e − q, per vertex (C). Boundary rows are meaningless under PEC;
/// use interior_max_abs to reduce.
VectorXd gauss_residual(const VectorXd& e, const VectorXd& q, const IntSparse& div_dual,
                        const SparseMatrix& star_eps);

/// max |v_k| over vertices with mask[k] false (pass mesh.boundary_vertex).
double interior_max_abs(const VectorXd& v, const std::vector<bool>& boundary);

struct EnergyBalance {
  double electric_prev = 0.0;  // We at n
  double electric_next = 0.0;  // We at n+1
  double magnetic_prev = 0.0;  // Wm at n
  double magnetic_next = 0.0;  // Wm at n+1
  double source_work = 0.0;    // Ps Δt over the step
  double residual = 0.0;       // ΔWe + ΔWm + Ps Δt

  double delta_electric() const { return electric_next - electric_prev; }
  double delta_magnetic() const { return magnetic_next - magnetic_prev; }
  /// Scale for relative checks: max(We + Wm, |Ps Δt|) at the end of the step.
  double scale() const;
};

/// Energy bookkeeping for one leap-frog step n → n+1.
///
/// We = ½ eᵀ[★ε]e at integer levels. Magnetic energy at level n is the
/// staggered product ½ b^{n−½}ᵀ[★μ⁻¹]b^{n+½}, and Ps Δt = Δt ½(eⁿ + eⁿ⁺¹)ᵀ i.
/// With these centerings the balance holds to solver tolerance. The three b
/// arrays are b^{n−½}, b^{n+½} and b^{n+3/2} = b^{n+½} − Δt C eⁿ⁺¹.
EnergyBalance energy_balance(const VectorXd& e_prev, const VectorXd& e_next, const VectorXd& b_prev,
                             const VectorXd& b_mid, const VectorXd& b_next, const VectorXd& i,
                             const SparseMatrix& star_eps, const SparseMatrix& star_mu_inv,
                             double dt);

struct WatchSample {
  int vertex = 0;  // 1-based, as in the mesh file
  double lhs = 0.0;  // (S̃[★ε]e)_v
  double rhs = 0.0;  // q_v
};

struct DiagnosticsRecord {
  long step = 0;
  double time = 0.0;
  double continuity_residual_inf = 0.0;  // C/s
  double continuity_bound = 0.0;         // 1e-12 max|Q| / Δt
  double gauss_residual_inf = 0.0;       // C, interior vertices
  double gauss_drift_inf = 0.0;          // C, change since step 0
  double electric_energy = 0.0;          // J
  double magnetic_energy = 0.0;          // J
  double source_work = 0.0;              // J
  double energy_residual = 0.0;          // J
  double energy_scale = 0.0;             // J
  double total_charge = 0.0;             // C, Σ q over vertices
  double expected_charge = 0.0;          // C, Σ Q over alive particles plus wall charge
  double max_speed = 0.0;                // m/s
  long alive = 0;
  long boundary_crossings = 0;
  long escaped = 0;
  long charge_totality_violations = 0;
  int cg_iterations = 0;
  bool magnetic_gauss = true;  // S b = 0 holds trivially without 3-cells
  std::vector<WatchSample> watch;
};

/// One watch row per watched vertex of `vertices` (1-based ids). Throws
/// ConfigError on an unknown id.
std::vector<WatchSample> watch_vertices(const Mesh& mesh, const VectorXd& gauss_lhs,
                                        const VectorXd& q, const std::vector<int>& vertices);

void write_diagnostics_header(std::ostream& out);
void write_diagnostics_row(std::ostream& out, const DiagnosticsRecord& r);
void write_watch_header(std::ostream& out);
void write_watch_rows(std::ostream& out, const DiagnosticsRecord& r);

/// 4 ulp of |Q|: the per-particle charge totality tolerance.
double charge_tolerance(double charge);

}  // namespace wpic
