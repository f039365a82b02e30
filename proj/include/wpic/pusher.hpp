#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include "wpic/mesh.hpp"

namespace wpic {

struct Particle {
  double charge = 0.0;  // C
  double mass = 1.0;    // kg
  Vec2 r = Vec2::Zero();  // at integer steps
  Vec3 v = Vec3::Zero();  // at half-integer steps
  int cell = -1;
  bool alive = true;
  bool immobile = false;
  int species = 0;
};

/// N = I − (qΔt/2m)[B]ₓ with B the average of the two half-step fields, so
/// that N v⁺ = Nᵀ v⁻ + (qΔt/m)E is the implicit Lorentz update.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> build_n_matrix(Scalar charge, Scalar mass, Scalar dt,
                                           const Eigen::Matrix<Scalar, 3, 1>& b_prev,
                                           const Eigen::Matrix<Scalar, 3, 1>& b_next) {
  const Eigen::Matrix<Scalar, 3, 1> b = Scalar(0.5) * (b_prev + b_next);
  const Scalar a = charge * dt / (Scalar(2) * mass);
  Eigen::Matrix<Scalar, 3, 3> n;
  n << Scalar(1), -a * b.z(), a * b.y(),
       a * b.z(), Scalar(1), -a * b.x(),
       -a * b.y(), a * b.x(), Scalar(1);
  return n;
}

/// v⁺ = N⁻¹Nᵀ v⁻ + (qΔt/m) N⁻¹ E. The 3×3 inverse is Eigen's cofactor formula.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 1> accelerate(Scalar charge, Scalar mass, Scalar dt,
                                       const Eigen::Matrix<Scalar, 3, 1>& v,
                                       const Eigen::Matrix<Scalar, 3, 1>& e,
                                       const Eigen::Matrix<Scalar, 3, 3>& n) {
  const Eigen::Matrix<Scalar, 3, 3> n_inv = n.inverse();
  return n_inv * (n.transpose() * v + (charge * dt / mass) * e);
}

inline void accelerate(Particle& p, const Vec3& e, const Eigen::Matrix3d& n, double dt) {
  p.v = accelerate(p.charge, p.mass, dt, p.v, e, n);
}

struct PushResult {
  Vec2 from;
  Vec2 to;
  int from_cell = -1;
  int walk_steps = 0;
};

/// r ← r + Δt v_xy, then relocate the cell by walking from the old one. A
/// particle whose new position is off the mesh is marked not alive; its cell
/// is left at the last face visited.
PushResult push(Particle& p, double dt, const Mesh& mesh);

/// Soft non-relativistic limit; push() logs a warning above it.
inline constexpr double kSpeedWarningFraction = 0.3;

}  // namespace wpic
