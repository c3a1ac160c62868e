#pragma once

#include <cstdint>
#include <vector>

#include "ivo/flow.hpp"
#include "ivo/geometry.hpp"
#include "ivo/segmentation.hpp"

namespace ivo {

inline Vec3 apply(const Motion& m, const Vec3& p) {
  return m.rotation * p + m.translation;
}

/// Independently moving rigid point cluster. Points are expressed in the
/// body frame; pose_per_frame maps body to world at each frame.
struct RigidBody {
  std::vector<Vec3> points;
  std::vector<Motion> pose_per_frame;
};

/// Synthetic dynamic scene: scattered static structure, rigid bodies with
/// their own per-frame motion, and a camera trajectory (world-from-camera).
struct Scene {
  std::vector<Vec3> static_points;
  std::vector<RigidBody> bodies;
  std::vector<Motion> camera_trajectory;
  CameraIntrinsics intrinsics;
  std::uint64_t seed = 0;
};

struct SceneConfig {
  int n_static = 40000;
  int n_bodies = 2;
  double dynamic_fraction_target = 0.0;
  int frames = 2;
  double camera_translation_step = 0.12;  // scene units per frame
  double camera_rotation_step = 0.008;    // radians per frame
  double body_translation_step = 0.12;
  double body_rotation_step = 0.01;
  double z_near = 2.0;
  double z_far = 8.0;
  double body_half_extent = 0.45;
  CameraIntrinsics intrinsics{500.0, 500.0, 320.0, 240.0, 640, 480};
};

/// Deterministic for a fixed seed. Bodies receive enough points that the
/// rendered dynamic pixel fraction approximates `dynamic_fraction_target`.
Scene generate_scene(std::uint64_t seed, const SceneConfig& config);

/// Per-pixel depth with validity (semi-dense: only splatted pixels valid).
struct DepthMap {
  int h = 0, w = 0;
  GridF z;
  GridU8 valid;

  static DepthMap empty(int h, int w);
};

/// Ground-truth bundle for the frame pair (t, t+1). Flow is defined on
/// pixels covered by a splatted point at frame t; occlusions are resolved by
/// a z-buffer (nearest depth wins, ties broken by point index). gt_motion is
/// camera_t^-1 o camera_{t+1}, the pose of camera t+1 in camera t's frame.
struct FramePairTruth {
  FlowField flow;
  DepthMap depth_t, depth_t1;
  SegMask gt_mask;
  Motion gt_motion;
};

FramePairTruth render_pair(const Scene& scene, int t);

/// Recovers the dynamic mask from depth maps and flow via a 3D consistency
/// test: a pixel is static iff ||(R X_t + T) - X_{t+1}|| <= tau, where X_t
/// unprojects depth_t at the pixel and X_{t+1} unprojects the bilinear
/// depth_t1 lookup at the flow-displaced location.
///
/// `cam_motion` is the point-transport motion mapping frame-t camera
/// coordinates to frame-t+1 camera coordinates; for a FramePairTruth this is
/// invert(gt_motion). It must carry metric scale.
SegMask recover_motion_mask(const DepthMap& depth_t, const DepthMap& depth_t1,
                            const FlowField& flow, const Motion& cam_motion,
                            const CameraIntrinsics& k, double tau = 0.05);

/// Adds independent zero-mean Gaussian noise to every valid pixel.
FlowField add_flow_noise(const FlowField& flow, double sigma_px,
                         std::uint64_t seed);

}  // namespace ivo
