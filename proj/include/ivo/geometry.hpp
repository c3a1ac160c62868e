#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "ivo/errors.hpp"
#include "ivo/grid.hpp"

namespace ivo {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// 3D rotation stored as a unit quaternion with canonical sign (w >= 0).
/// Axis-angle (rotation vector) conversions are provided for the cases where
/// a minimal 3-vector parameterization is required.
class Rotation {
 public:
  Rotation() : q_(Eigen::Quaterniond::Identity()) {}

  // Normalizes and canonicalizes the sign.
  explicit Rotation(const Eigen::Quaterniond& q);

  static Rotation identity() { return Rotation(); }
  static Rotation from_axis_angle(const Vec3& r);
  static Rotation from_matrix(const Mat3& m);

  // Rotation vector with angle in [0, pi].
  Vec3 axis_angle() const;
  Mat3 matrix() const { return q_.toRotationMatrix(); }
  const Eigen::Quaterniond& quat() const { return q_; }

  Rotation inverse() const;
  Rotation operator*(const Rotation& rhs) const {
    return Rotation(q_ * rhs.q_);
  }
  Vec3 operator*(const Vec3& p) const { return q_ * p; }

 private:
  Eigen::Quaterniond q_;
};

/// Relative rigid motion (R | T). When `up_to_scale` is set the translation
/// carries direction only and is kept at unit norm (or zero).
///
/// Pipeline convention: the motion between frames t and t+1 is the pose of
/// camera t+1 expressed in camera t's frame, i.e. applying it to a point in
/// t+1 camera coordinates yields t camera coordinates. Functions that need
/// the opposite (point-transport) direction say so explicitly.
struct Motion {
  Rotation rotation;
  Vec3 translation = Vec3::Zero();
  bool up_to_scale = false;

  static Motion identity() { return Motion{}; }
};

/// Applies `b` then `a`. Composition of up-to-scale motions is undefined.
Motion compose(const Motion& a, const Motion& b);

/// Inverse motion. Well defined for up-to-scale inputs as well (the unit
/// translation norm is preserved).
Motion invert(const Motion& m);

/// Angle of the relative rotation between `a` and `b`, in [0, pi].
double geodesic_angle(const Rotation& a, const Rotation& b);

/// Pinhole camera. Integer pixel coordinates address pixel centers.
struct CameraIntrinsics {
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  int width = 0, height = 0;
};

/// Throws InvalidConfig unless fx,fy > 0 and the principal point lies
/// strictly inside the image.
void validate_intrinsics(const CameraIntrinsics& k);

/// Projects a camera-frame point; throws BehindCamera for Z <= 1e-9.
Vec2 project(const Vec3& point, const CameraIntrinsics& k);

/// Inverse of project for a known depth Z > 0.
Vec3 unproject(const Vec2& pixel, double depth, const CameraIntrinsics& k);

/// Two-channel grid of normalized coordinates ((u-cx)/fx, (v-cy)/fy).
struct IntrinsicsLayer {
  int h = 0, w = 0;
  GridD x;  // (u - cx) / fx
  GridD y;  // (v - cy) / fy
};

/// Samples the normalized-coordinate layer on an h x w grid whose pixel
/// centers are mapped onto the camera's native resolution.
IntrinsicsLayer make_intrinsics_layer(const CameraIntrinsics& k, int h, int w);

struct CropRect {
  int x = 0, y = 0;
  int width = 0, height = 0;
};

/// Intrinsics after cropping to `crop` and resizing the crop to
/// out_width x out_height: principal point shifted by the crop origin, then
/// fx,fy,cx,cy scaled by the output/crop ratio.
CameraIntrinsics rcr_adjust(const CameraIntrinsics& k, const CropRect& crop,
                            int out_width, int out_height);

/// 4x4 homogeneous matrix of a motion (rotation must not be up-to-scale for
/// meaningful composition, but the conversion itself is unconditional).
Mat4 to_homogeneous(const Motion& m);

}  // namespace ivo
