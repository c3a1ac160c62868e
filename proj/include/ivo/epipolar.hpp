#pragma once

#include "ivo/geometry.hpp"

namespace ivo {

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

/// Essential matrix of a relative motion in the point-transport convention
/// X_{t+1} = R X_t + T, so that x_{t+1}^T E x_t = 0 for correspondences in
/// normalized coordinates.
inline Mat3 essential_from_transport(const Mat3& r, const Vec3& t) {
  return skew(t) * r;
}

/// Essential matrix from a pipeline-convention motion (pose of camera t+1 in
/// camera t's frame). Satisfies x_{t+1}^T E x_t = 0.
inline Mat3 essential_from_motion(const Motion& m) {
  const Mat3 r = m.rotation.matrix();
  return essential_from_transport(r.transpose(),
                                  -(r.transpose() * m.translation));
}

/// First-order geometric distance of a correspondence to the epipolar
/// constraint manifold, in normalized image units. `x0` belongs to frame t,
/// `x1` to frame t+1; both are homogeneous with z = 1.
inline double sampson_distance(const Mat3& e, const Vec3& x0, const Vec3& x1) {
  const Vec3 ex0 = e * x0;
  const Vec3 etx1 = e.transpose() * x1;
  const double c = x1.dot(ex0);
  const double denom = ex0.x() * ex0.x() + ex0.y() * ex0.y() +
                       etx1.x() * etx1.x() + etx1.y() * etx1.y();
  if (denom <= 0.0) return 0.0;
  return std::abs(c) / std::sqrt(denom);
}

}  // namespace ivo
