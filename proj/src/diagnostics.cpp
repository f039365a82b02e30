#include "wpic/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "wpic/error.hpp"

namespace wpic {

VectorXd continuity_residual(const VectorXd& q_prev, const VectorXd& q_next, const VectorXd& i,
                             const IntSparse& div_dual, double dt) {
  return (q_next - q_prev) / dt + div_dual.cast<double>() * i;
}

VectorXd gauss_residual(const VectorXd& e, const VectorXd& q, const IntSparse& div_dual,
                        const SparseMatrix& star_eps) {
  return div_dual.cast<double>() * (star_eps * e) - q;
}

double interior_max_abs(const VectorXd& v, const std::vector<bool>& boundary) {
  double m = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k)
    if (!boundary[k]) m = std::max(m, std::abs(v[k]));
  return m;
}

double EnergyBalance::scale() const {
  return std::max(std::abs(electric_next + magnetic_next), std::abs(source_work));
}

EnergyBalance energy_balance(const VectorXd& e_prev, const VectorXd& e_next, const VectorXd& b_prev,
                             const VectorXd& b_mid, const VectorXd& b_next, const VectorXd& i,
                             const SparseMatrix& star_eps, const SparseMatrix& star_mu_inv,
                             double dt) {
  EnergyBalance out;
  out.electric_prev = 0.5 * e_prev.dot(star_eps * e_prev);
  out.electric_next = 0.5 * e_next.dot(star_eps * e_next);
  const VectorXd mu_b_mid = star_mu_inv * b_mid;
  out.magnetic_prev = 0.5 * b_prev.dot(mu_b_mid);
  out.magnetic_next = 0.5 * b_next.dot(mu_b_mid);
  out.source_work = dt * 0.5 * (e_prev + e_next).dot(i);
  out.residual = out.delta_electric() + out.delta_magnetic() + out.source_work;
  return out;
}

std::vector<WatchSample> watch_vertices(const Mesh& mesh, const VectorXd& gauss_lhs,
                                        const VectorXd& q, const std::vector<int>& vertices) {
  std::vector<WatchSample> rows;
  rows.reserve(vertices.size());
  for (int id : vertices) {
    if (id < 1 || id > mesh.num_vertices())
      throw ConfigError("watched vertex " + std::to_string(id) + " does not exist");
    rows.push_back({id, gauss_lhs[id - 1], q[id - 1]});
  }
  return rows;
}

void write_diagnostics_header(std::ostream& out) {
  out << "step,time,continuity_residual_inf,continuity_bound,gauss_residual_inf,gauss_drift_inf,"
         "We,Wm,Ps_dt,energy_balance_residual,energy_scale,total_charge,expected_charge,"
         "max_speed,alive,boundary_crossings,escaped,charge_totality_violations,cg_iterations,"
         "magnetic_gauss\n";
}

void write_diagnostics_row(std::ostream& out, const DiagnosticsRecord& r) {
  out << r.step << ',' << r.time << ',' << r.continuity_residual_inf << ',' << r.continuity_bound
      << ',' << r.gauss_residual_inf << ',' << r.gauss_drift_inf << ',' << r.electric_energy << ','
      << r.magnetic_energy << ',' << r.source_work << ',' << r.energy_residual << ','
      << r.energy_scale << ',' << r.total_charge << ',' << r.expected_charge << ',' << r.max_speed
      << ',' << r.alive << ',' << r.boundary_crossings << ',' << r.escaped << ','
      << r.charge_totality_violations << ',' << r.cg_iterations << ',' << (r.magnetic_gauss ? 1 : 0)
      << '\n';
}

void write_watch_header(std::ostream& out) { out << "step,vertex,lhs,rhs,residual\n"; }

void write_watch_rows(std::ostream& out, const DiagnosticsRecord& r) {
  for (const WatchSample& w : r.watch)
    out << r.step << ',' << w.vertex << ',' << w.lhs << ',' << w.rhs << ',' << w.lhs - w.rhs << '\n';
}

double charge_tolerance(double charge) {
  const double a = std::abs(charge);
  return 4.0 * (std::nextafter(a, std::numeric_limits<double>::infinity()) - a);
}

}  // namespace wpic
