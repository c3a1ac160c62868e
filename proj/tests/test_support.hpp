#pragma once

// Shared helpers for the test binaries. Oracles here are deliberately
// independent of the library code paths they check.

#include <cmath>
#include <vector>

#include "ivo/evaluation.hpp"
#include "ivo/geometry.hpp"
#include "ivo/rng.hpp"
#include "ivo/segmentation.hpp"
#include "ivo/simulator.hpp"

namespace ivo::test {

inline Rotation random_rotation(Rng& rng, double max_angle = 3.0) {
  Vec3 axis(rng.normal(), rng.normal(), rng.normal());
  if (axis.norm() < 1e-9) axis = Vec3::UnitZ();
  axis.normalize();
  return Rotation::from_axis_angle(axis * rng.uniform(0.0, max_angle));
}

inline Motion random_motion(Rng& rng, double t_extent = 2.0) {
  Motion m;
  m.rotation = random_rotation(rng);
  m.translation = Vec3(rng.uniform(-t_extent, t_extent),
                       rng.uniform(-t_extent, t_extent),
                       rng.uniform(-t_extent, t_extent));
  return m;
}

inline double rotation_error_deg(const Rotation& a, const Rotation& b) {
  return geodesic_angle(a, b) * 180.0 / M_PI;
}

inline double direction_error_deg(const Vec3& a, const Vec3& b) {
  const Vec3 an = a.normalized(), bn = b.normalized();
  return std::atan2(an.cross(bn).norm(), an.dot(bn)) * 180.0 / M_PI;
}

// Majority-of-valid-source downsampling of a ground-truth mask onto the flow
// grid (ties count as dynamic).
inline SegMask downsample_mask_majority(const SegMask& mask,
                                        const GridU8& valid, int factor) {
  const int oh = mask.h / factor, ow = mask.w / factor;
  SegMask out = SegMask::zeros(oh, ow);
  for (int bi = 0; bi < oh; ++bi) {
    for (int bj = 0; bj < ow; ++bj) {
      int dyn = 0, n = 0;
      for (int di = 0; di < factor; ++di) {
        for (int dj = 0; dj < factor; ++dj) {
          const int i = bi * factor + di, j = bj * factor + dj;
          if (!valid(i, j)) continue;
          ++n;
          if (mask.m(i, j)) ++dyn;
        }
      }
      if (n > 0 && 2 * dyn >= n) out.m(bi, bj) = 1;
    }
  }
  return out;
}

inline double mask_iou(const SegMask& a, const SegMask& b,
                       const GridU8& valid) {
  int inter = 0, uni = 0;
  for (int i = 0; i < a.h; ++i) {
    for (int j = 0; j < a.w; ++j) {
      if (!valid(i, j)) continue;
      const bool pa = a.m(i, j) != 0, pb = b.m(i, j) != 0;
      if (pa && pb) ++inter;
      if (pa || pb) ++uni;
    }
  }
  return uni > 0 ? static_cast<double>(inter) / uni : 1.0;
}

// ---------------------------------------------------------------------------
// Alignment oracle: Horn's closed-form quaternion method (largest eigenvector
// of the 4x4 N matrix via Jacobi sweeps) plus the similarity-scale formula.
// A different algorithm from the SVD route used by the library.
// ---------------------------------------------------------------------------

inline Eigen::Vector4d max_eigenvector_4x4(Eigen::Matrix4d a) {
  Eigen::Matrix4d v = Eigen::Matrix4d::Identity();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 4; ++p)
      for (int q = p + 1; q < 4; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-24) break;
    for (int p = 0; p < 4; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        if (std::abs(a(p, q)) < 1e-30) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Eigen::Matrix4d rot = Eigen::Matrix4d::Identity();
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        a = rot.transpose() * a * rot;
        v = v * rot;
      }
    }
  }
  int best = 0;
  for (int i = 1; i < 4; ++i)
    if (a(i, i) > a(best, best)) best = i;
  return v.col(best);
}

struct OracleAlignment {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
};

inline OracleAlignment horn_align(const std::vector<Vec3>& src,
                                  const std::vector<Vec3>& dst,
                                  bool with_scale) {
  const double n = static_cast<double>(src.size());
  Vec3 cs = Vec3::Zero(), cd = Vec3::Zero();
  for (const Vec3& p : src) cs += p;
  for (const Vec3& p : dst) cd += p;
  cs /= n;
  cd /= n;

  Mat3 h = Mat3::Zero();
  double var_src = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    const Vec3 a = src[i] - cs;
    const Vec3 b = dst[i] - cd;
    h += a * b.transpose();
    var_src += a.squaredNorm();
  }
  const double sxx = h(0, 0), sxy = h(0, 1), sxz = h(0, 2);
  const double syx = h(1, 0), syy = h(1, 1), syz = h(1, 2);
  const double szx = h(2, 0), szy = h(2, 1), szz = h(2, 2);
  Eigen::Matrix4d nmat;
  nmat << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
      syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
      szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
      sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;
  const Eigen::Vector4d q = max_eigenvector_4x4(nmat);
  const Eigen::Quaterniond quat(q(0), q(1), q(2), q(3));
  OracleAlignment out;
  out.rotation = quat.normalized().toRotationMatrix();

  if (with_scale) {
    // Umeyama's scale: sum of rotated cross terms over source variance.
    double num = 0.0;
    for (std::size_t i = 0; i < src.size(); ++i) {
      num += (dst[i] - cd).dot(out.rotation * (src[i] - cs));
    }
    out.scale = num / var_src;
  }
  out.translation = cd - out.scale * (out.rotation * cs);
  return out;
}

inline double oracle_ate(const Trajectory& est, const Trajectory& gt,
                         bool with_scale) {
  std::vector<Vec3> src, dst;
  for (std::size_t i = 0; i < est.size(); ++i) {
    src.push_back(est.poses[i].translation);
    dst.push_back(gt.poses[i].translation);
  }
  const OracleAlignment g = horn_align(src, dst, with_scale);
  double sum = 0.0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    sum += (dst[i] - (g.scale * (g.rotation * src[i]) + g.translation))
               .squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(src.size()));
}

// ---------------------------------------------------------------------------
// Designed scene for exact mask recovery. Every surface is sampled on the
// pixel grid of the frame t+1 camera, and camera / body translations are
// quantized so that all projections land on integer pixels in both frames:
// splats are exact, flow vectors are exact integers, and the flow-displaced
// depth lookups hit grid corners instead of interpolating across surfaces.
// Fronto-parallel background plane plus one nearer moving slab owning a
// disjoint pixel region at t+1.
// ---------------------------------------------------------------------------

struct RecoveryScene {
  Scene scene;
  double min_body_displacement = 0.0;
};

inline RecoveryScene make_recovery_scene(std::uint64_t seed, int width = 160,
                                         int height = 120) {
  Rng rng(seed);
  RecoveryScene out;
  Scene& scene = out.scene;
  scene.seed = seed;
  scene.intrinsics = {140.0, 140.0, width / 2.0, height / 2.0, width, height};
  const CameraIntrinsics& k = scene.intrinsics;

  const double z_plane = rng.uniform(5.2, 7.0);
  const double z_body = rng.uniform(2.2, 3.0);

  // Camera step: the plane's flow is exactly (-a1, -a2) pixels.
  const int a1 = 2 + rng.uniform_int(3);
  const int a2 = rng.uniform_int(3) - 1;
  Motion step;  // pure translation keeps the pixel alignment exact
  step.translation = Vec3(a1 * z_plane / k.fx, a2 * z_plane / k.fy, 0.0);
  scene.camera_trajectory = {Motion::identity(), step};

  // Body displacement quantized so its frame-t splat is also pixel-aligned.
  const int m = rng.uniform() < 0.5 ? -3 : -4;
  const int n = rng.uniform() < 0.5 ? -2 : 2;
  const Vec3 body_shift(step.translation.x() - m * z_body / k.fx,
                        step.translation.y() - n * z_body / k.fy, 0.0);
  out.min_body_displacement = body_shift.norm();

  const int bx0 = width / 2 - 18, bx1 = width / 2 + 18;
  const int by0 = height / 2 - 14, by1 = height / 2 + 14;
  RigidBody body;
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const bool in_body = u >= bx0 && u < bx1 && v >= by0 && v < by1;
      const double z = in_body ? z_body : z_plane;
      const Vec3 world = apply(step, unproject(Vec2(u, v), z, k));
      if (in_body) {
        body.points.push_back(world);
      } else {
        scene.static_points.push_back(world);
      }
    }
  }
  Motion pose_t1 = Motion::identity();
  Motion pose_t = Motion::identity();
  pose_t.translation = -body_shift;
  body.pose_per_frame = {pose_t, pose_t1};
  scene.bodies.push_back(std::move(body));
  return out;
}

}  // namespace ivo::test
