#include "ivo/geometry.hpp"

#include <cmath>

namespace ivo {

namespace {

Eigen::Quaterniond canonicalize(Eigen::Quaterniond q) {
  q.normalize();
  // w >= 0; for w == 0 pick a deterministic hemisphere.
  bool flip = q.w() < 0.0;
  if (q.w() == 0.0) {
    if (q.x() != 0.0) {
      flip = q.x() < 0.0;
    } else if (q.y() != 0.0) {
      flip = q.y() < 0.0;
    } else {
      flip = q.z() < 0.0;
    }
  }
  if (flip) q.coeffs() = -q.coeffs();
  return q;
}

}  // namespace

Rotation::Rotation(const Eigen::Quaterniond& q) : q_(canonicalize(q)) {}

Rotation Rotation::from_axis_angle(const Vec3& r) {
  const double theta = r.norm();
  Eigen::Quaterniond q;
  if (theta < 1e-12) {
    // sin(t/2)/t ~ 1/2 - t^2/48
    const double s = 0.5 - theta * theta / 48.0;
    q = Eigen::Quaterniond(1.0, s * r.x(), s * r.y(), s * r.z());
  } else {
    const double s = std::sin(0.5 * theta) / theta;
    q = Eigen::Quaterniond(std::cos(0.5 * theta), s * r.x(), s * r.y(),
                           s * r.z());
  }
  return Rotation(q);
}

Rotation Rotation::from_matrix(const Mat3& m) {
  return Rotation(Eigen::Quaterniond(m));
}

Vec3 Rotation::axis_angle() const {
  const Vec3 v = q_.vec();
  const double vn = v.norm();
  const double theta = 2.0 * std::atan2(vn, q_.w());
  if (vn < 1e-12) return 2.0 * v;  // first-order
  return (theta / vn) * v;
}

Rotation Rotation::inverse() const { return Rotation(q_.conjugate()); }

Motion compose(const Motion& a, const Motion& b) {
  if (a.up_to_scale || b.up_to_scale) {
    throw UpToScaleComposition(
        "compose: up-to-scale motions cannot be composed");
  }
  Motion out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

Motion invert(const Motion& m) {
  Motion out;
  out.rotation = m.rotation.inverse();
  out.translation = -(out.rotation * m.translation);
  out.up_to_scale = m.up_to_scale;
  return out;
}

double geodesic_angle(const Rotation& a, const Rotation& b) {
  const Eigen::Quaterniond rel = a.quat().conjugate() * b.quat();
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

void validate_intrinsics(const CameraIntrinsics& k) {
  if (!(k.fx > 0.0) || !(k.fy > 0.0)) {
    throw InvalidConfig("intrinsics: focal lengths must be positive");
  }
  if (!(k.cx > 0.0 && k.cx < k.width) || !(k.cy > 0.0 && k.cy < k.height)) {
    throw InvalidConfig("intrinsics: principal point outside image");
  }
  if (k.width < 1 || k.height < 1) {
    throw InvalidConfig("intrinsics: empty image");
  }
}

Vec2 project(const Vec3& point, const CameraIntrinsics& k) {
  if (point.z() <= 1e-9) {
    throw BehindCamera("project: point has non-positive depth");
  }
  return {k.fx * point.x() / point.z() + k.cx,
          k.fy * point.y() / point.z() + k.cy};
}

Vec3 unproject(const Vec2& pixel, double depth, const CameraIntrinsics& k) {
  return {(pixel.x() - k.cx) / k.fx * depth, (pixel.y() - k.cy) / k.fy * depth,
          depth};
}

IntrinsicsLayer make_intrinsics_layer(const CameraIntrinsics& k, int h,
                                      int w) {
  IntrinsicsLayer layer;
  layer.h = h;
  layer.w = w;
  layer.x.resize(h, w);
  layer.y.resize(h, w);
  const double sx = static_cast<double>(k.width) / w;
  const double sy = static_cast<double>(k.height) / h;
  for (int i = 0; i < h; ++i) {
    const double v = (i + 0.5) * sy - 0.5;
    const double yn = (v - k.cy) / k.fy;
    for (int j = 0; j < w; ++j) {
      const double u = (j + 0.5) * sx - 0.5;
      layer.x(i, j) = (u - k.cx) / k.fx;
      layer.y(i, j) = yn;
    }
  }
  return layer;
}

CameraIntrinsics rcr_adjust(const CameraIntrinsics& k, const CropRect& crop,
                            int out_width, int out_height) {
  if (crop.x < 0 || crop.y < 0 || crop.width < 1 || crop.height < 1 ||
      crop.x + crop.width > k.width || crop.y + crop.height > k.height) {
    throw CropOutOfBounds("rcr_adjust: crop outside image bounds");
  }
  if (out_width < 1 || out_height < 1) {
    throw InvalidConfig("rcr_adjust: empty output size");
  }
  const double sx = static_cast<double>(out_width) / crop.width;
  const double sy = static_cast<double>(out_height) / crop.height;
  CameraIntrinsics out;
  out.fx = k.fx * sx;
  out.fy = k.fy * sy;
  out.cx = (k.cx - crop.x) * sx;
  out.cy = (k.cy - crop.y) * sy;
  out.width = out_width;
  out.height = out_height;
  return out;
}

Mat4 to_homogeneous(const Motion& m) {
  Mat4 t = Mat4::Identity();
  t.topLeftCorner<3, 3>() = m.rotation.matrix();
  t.topRightCorner<3, 1>() = m.translation;
  return t;
}

}  // namespace ivo
