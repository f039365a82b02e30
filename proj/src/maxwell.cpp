#include "wpic/maxwell.hpp"

#include <cmath>

#include <Eigen/SparseCholesky>

#include "wpic/error.hpp"
#include "wpic/rng.hpp"

namespace wpic {

FieldState FieldState::zeros(const Mesh& mesh) {
  FieldState s;
  s.e = VectorXd::Zero(mesh.num_edges());
  s.b = VectorXd::Zero(mesh.num_faces());
  s.i = VectorXd::Zero(mesh.num_edges());
  s.q = VectorXd::Zero(mesh.num_vertices());
  return s;
}

bool FieldState::finite() const {
  return e.allFinite() && b.allFinite() && i.allFinite() && q.allFinite();
}

void SolverConfig::validate() const {
  if (!(dt > 0) || !std::isfinite(dt)) throw ConfigError("time step must be positive");
  if (!(cg_rel_tol > 0 && cg_rel_tol < 1)) throw ConfigError("cg_rel_tol must lie in (0, 1)");
  if (cg_max_iter < 1) throw ConfigError("cg_max_iter must be positive");
  if (!(courant_safety > 0)) throw ConfigError("courant_safety must be positive");
}

void step_b(const SparseMatrix& curl, const VectorXd& e, double dt, VectorXd& b) {
  b.noalias() -= dt * (curl * e);
}

std::vector<int> interior_edge_list(const Mesh& mesh) {
  std::vector<int> keep;
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (!mesh.boundary_edge[e]) keep.push_back(e);
  return keep;
}

SparseMatrix restrict_symmetric(const SparseMatrix& m, const std::vector<int>& keep) {
  std::vector<int> local(m.rows(), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) local[keep[k]] = static_cast<int>(k);
  std::vector<Eigen::Triplet<double>> triplets;
  for (int col = 0; col < m.outerSize(); ++col) {
    if (local[col] < 0) continue;
    for (SparseMatrix::InnerIterator it(m, col); it; ++it)
      if (local[it.row()] >= 0) triplets.emplace_back(local[it.row()], local[col], it.value());
  }
  const auto n = static_cast<Eigen::Index>(keep.size());
  SparseMatrix r(n, n);
  r.setFromTriplets(triplets.begin(), triplets.end());
  return r;
}

MaxwellStepper::MaxwellStepper(const Mesh& mesh, const IncidenceMatrices& incidence,
                               const HodgeOperators& hodge, const SolverConfig& config)
    : config_(config),
      curl_(incidence.curl.cast<double>()),
      interior_(interior_edge_list(mesh)) {
  config_.validate();
  curl_t_star_mu_ = SparseMatrix(curl_.transpose()) * hodge.star_mu_inv;
  star_eps_interior_ = restrict_symmetric(hodge.star_eps, interior_);
  last_increment_ = VectorXd::Zero(static_cast<Eigen::Index>(interior_.size()));
  if (!interior_.empty()) {
    cg_.setTolerance(config_.cg_rel_tol);
    cg_.setMaxIterations(config_.cg_max_iter);
    cg_.compute(star_eps_interior_);
    if (cg_.info() != Eigen::Success) throw SolverError("cannot set up the [★ε] solve");
  }
}

void MaxwellStepper::set_tolerance(double rel_tol) {
  config_.cg_rel_tol = rel_tol;
  config_.validate();
  cg_.setTolerance(rel_tol);
}

void MaxwellStepper::step_b(FieldState& state) const {
  wpic::step_b(curl_, state.e, config_.dt, state.b);
  state.b_level += 1.0;
}

VectorXd MaxwellStepper::curl_increment(const VectorXd& e) const { return config_.dt * (curl_ * e); }

SolveStats MaxwellStepper::step_e(FieldState& state) {
  SolveStats stats;
  state.e_level += 1.0;
  if (interior_.empty()) return stats;

  const VectorXd rhs_full = config_.dt * (curl_t_star_mu_ * state.b - state.i);
  VectorXd rhs(static_cast<Eigen::Index>(interior_.size()));
  for (std::size_t k = 0; k < interior_.size(); ++k) rhs[k] = rhs_full[interior_[k]];

  if (rhs.isZero(0.0)) {
    last_increment_.setZero();
    return stats;
  }
  const VectorXd delta = cg_.solveWithGuess(rhs, last_increment_);
  stats.iterations = static_cast<int>(cg_.iterations());
  stats.relative_residual = cg_.error();
  if (cg_.info() != Eigen::Success || !delta.allFinite())
    throw SolverError("e-update CG did not converge: " + std::to_string(stats.iterations) +
                      " iterations, relative residual " + std::to_string(stats.relative_residual));
  for (std::size_t k = 0; k < interior_.size(); ++k) state.e[interior_[k]] += delta[k];
  last_increment_ = delta;
  return stats;
}

namespace {

CourantEstimate power_iteration(const IncidenceMatrices& incidence,
                                const HodgeOperators& hodge, const std::vector<int>& edges,
                                double rel_tol, int max_iter) {
  const SparseMatrix curl = incidence.curl.cast<double>();
  const SparseMatrix stiffness_full = SparseMatrix(curl.transpose()) * hodge.star_mu_inv * curl;
  const SparseMatrix stiffness = restrict_symmetric(stiffness_full, edges);
  const SparseMatrix mass = restrict_symmetric(hodge.star_eps, edges);
  Eigen::SimplicialLLT<SparseMatrix> llt(mass);
  if (llt.info() != Eigen::Success) throw SolverError("[★ε] is not positive definite");

  CounterRng rng(0x5eed);
  VectorXd x(mass.rows());
  for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = rng.uniform(-1.0, 1.0);
  x /= std::sqrt(x.dot(mass * x));

  CourantEstimate out;
  double previous = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    const VectorXd kx = stiffness * x;
    // x is mass-normalized, so the Rayleigh quotient is xᵀKx.
    const double lambda = x.dot(kx);
    VectorXd z = llt.solve(kx);
    const double norm = std::sqrt(z.dot(mass * z));
    if (!(norm > 0) || !std::isfinite(norm)) throw SolverError("power iteration collapsed");
    x = z / norm;
    if (it > 2 && std::abs(lambda - previous) <= rel_tol * lambda) {
      out.lambda_max = lambda;
      out.iterations = it;
      out.dt_c = 2.0 / std::sqrt(lambda);
      return out;
    }
    previous = lambda;
  }
  throw SolverError("Courant estimate did not converge in " + std::to_string(max_iter) + " iterations");
}

}  // namespace

CourantEstimate estimate_courant(const Mesh& mesh, const IncidenceMatrices& incidence,
                                 const HodgeOperators& hodge, double rel_tol, int max_iter) {
  std::vector<int> edges = interior_edge_list(mesh);
  if (edges.empty()) {
    // Every edge is on the conductor; estimate the unconstrained operator instead.
    edges.resize(mesh.num_edges());
    for (int e = 0; e < mesh.num_edges(); ++e) edges[e] = e;
  }
  return power_iteration(incidence, hodge, edges, rel_tol, max_iter);
}

}  // namespace wpic
