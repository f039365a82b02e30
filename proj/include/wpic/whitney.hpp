#pragma once

// Lowest-order Whitney forms on a triangle, evaluated from barycentric
// coordinates. Local edges use the ascending pairs (1,2), (1,3), (2,3); global
// orientation signs are applied by the caller.

#include <array>

#include <Eigen/Core>

namespace wpic::whitney {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;

inline constexpr std::array<std::array<int, 2>, 3> kEdgeVertices{{{0, 1}, {0, 2}, {1, 2}}};

/// ẑ × v
template <typename Scalar>
Vector2<Scalar> rotate_ccw(const Vector2<Scalar>& v) {
  return Vector2<Scalar>(-v.y(), v.x());
}

template <typename Scalar>
Scalar signed_area(const Vector2<Scalar>& a, const Vector2<Scalar>& b, const Vector2<Scalar>& c) {
  const Vector2<Scalar> u = b - a;
  const Vector2<Scalar> w = c - a;
  return Scalar(0.5) * (u.x() * w.y() - u.y() * w.x());
}

/// ∇λ_i = ẑ × (x_k − x_j) / 2A for (i, j, k) cyclic. Constant over the face.
template <typename Scalar>
std::array<Vector2<Scalar>, 3> barycentric_gradients(const Vector2<Scalar>& x1,
                                                     const Vector2<Scalar>& x2,
                                                     const Vector2<Scalar>& x3) {
  const Scalar two_area = Scalar(2) * signed_area(x1, x2, x3);
  return {rotate_ccw<Scalar>(x3 - x2) / two_area, rotate_ccw<Scalar>(x1 - x3) / two_area,
          rotate_ccw<Scalar>(x2 - x1) / two_area};
}

/// W⁰_i = λ_i
template <typename Scalar>
Scalar eval_w0(const Vector3<Scalar>& lambda, int local_vertex) {
  return lambda[local_vertex];
}

/// W¹_ij = λ_i ∇λ_j − λ_j ∇λ_i for local edge (i, j), i < j.
template <typename Scalar>
Vector2<Scalar> eval_w1(const std::array<Vector2<Scalar>, 3>& grads,
                        const Vector3<Scalar>& lambda, int local_edge) {
  const int i = kEdgeVertices[local_edge][0];
  const int j = kEdgeVertices[local_edge][1];
  return lambda[i] * grads[j] - lambda[j] * grads[i];
}

/// In 2-D the face form is the scalar 1/A on its own triangle.
template <typename Scalar>
Scalar eval_w2(Scalar area) {
  return Scalar(1) / area;
}

/// Closed-form ∫ W¹_ij · dL along the straight path from λ_start to λ_end:
/// λ_iˢ λ_jᶠ − λ_iᶠ λ_jˢ. No geometry is needed beyond the barycentric map.
template <typename Scalar>
Scalar line_integral_w1(const Vector3<Scalar>& start, const Vector3<Scalar>& end, int local_edge) {
  const int i = kEdgeVertices[local_edge][0];
  const int j = kEdgeVertices[local_edge][1];
  return start[i] * end[j] - end[i] * start[j];
}

/// All three local line integrals at once.
template <typename Scalar>
Vector3<Scalar> line_integrals_w1(const Vector3<Scalar>& start, const Vector3<Scalar>& end) {
  return Vector3<Scalar>(line_integral_w1(start, end, 0), line_integral_w1(start, end, 1),
                         line_integral_w1(start, end, 2));
}

}  // namespace wpic::whitney
