#include "ivo/simulator.hpp"

#include <cmath>
#include <limits>

#include "ivo/rng.hpp"

namespace ivo {

namespace {

Vec3 random_unit(Rng& rng) {
  while (true) {
    const Vec3 v(rng.normal(), rng.normal(), rng.normal());
    const double n = v.norm();
    if (n > 1e-6) return v / n;
  }
}

bool nonidentity(const Motion& a, const Motion& b) {
  return geodesic_angle(a.rotation, b.rotation) > 1e-12 ||
         (a.translation - b.translation).norm() > 1e-12;
}

}  // namespace

Scene generate_scene(std::uint64_t seed, const SceneConfig& config) {
  if (config.n_static < 1 || config.frames < 2 || config.n_bodies < 0 ||
      config.dynamic_fraction_target < 0.0 ||
      config.dynamic_fraction_target > 1.0 || !(config.z_near > 0.0) ||
      config.z_far <= config.z_near || !(config.body_half_extent > 0.0)) {
    throw InvalidConfig("generate_scene: bad config");
  }
  validate_intrinsics(config.intrinsics);

  Rng rng(seed);
  Scene scene;
  scene.seed = seed;
  scene.intrinsics = config.intrinsics;

  // Camera trajectory: a smooth random walk of fixed per-frame magnitudes.
  Motion world_from_cam = Motion::identity();
  scene.camera_trajectory.reserve(config.frames);
  for (int f = 0; f < config.frames; ++f) {
    scene.camera_trajectory.push_back(world_from_cam);
    Motion step;
    step.rotation =
        Rotation::from_axis_angle(random_unit(rng) * config.camera_rotation_step);
    Vec3 dir = random_unit(rng);
    dir.z() *= 0.5;  // damp looming so points stay in view longer
    if (dir.norm() > 1e-9) dir.normalize();
    step.translation = dir * config.camera_translation_step;
    world_from_cam = compose(world_from_cam, step);
  }

  const CameraIntrinsics& k = config.intrinsics;
  auto sample_in_view = [&](double margin_frac, double zlo, double zhi) {
    const int f = rng.uniform_int(config.frames);
    const double mx = margin_frac * k.width;
    const double my = margin_frac * k.height;
    const Vec2 px(rng.uniform(mx, k.width - 1 - mx),
                  rng.uniform(my, k.height - 1 - my));
    const double z = rng.uniform(zlo, zhi);
    return apply(scene.camera_trajectory[f], unproject(px, z, k));
  };

  scene.static_points.reserve(config.n_static);
  for (int i = 0; i < config.n_static; ++i) {
    scene.static_points.push_back(
        sample_in_view(0.0, config.z_near, config.z_far));
  }

  int n_dynamic = 0;
  if (config.n_bodies > 0 && config.dynamic_fraction_target > 0.0) {
    const double f = config.dynamic_fraction_target;
    n_dynamic = static_cast<int>(std::lround(config.n_static * f / (1.0 - f)));
  }
  for (int b = 0; b < config.n_bodies && n_dynamic > 0; ++b) {
    RigidBody body;
    const int n_points = n_dynamic / config.n_bodies +
                         (b < n_dynamic % config.n_bodies ? 1 : 0);
    if (n_points < 1) continue;
    // Bodies sit in the nearer half of the depth range so they occlude
    // static structure the way foreground objects do.
    const double z_mid = 0.5 * (config.z_near + config.z_far);
    const Vec3 center = sample_in_view(0.15, config.z_near, z_mid);
    const double s = config.body_half_extent;
    body.points.reserve(n_points);
    for (int i = 0; i < n_points; ++i) {
      body.points.emplace_back(rng.uniform(-s, s), rng.uniform(-s, s),
                               rng.uniform(-s, s));
    }
    Vec3 velocity = random_unit(rng);
    velocity.z() *= 0.3;  // mostly lateral: keeps motion segmentable
    if (velocity.norm() > 1e-9) velocity.normalize();
    velocity *= config.body_translation_step;
    const Vec3 spin_axis = random_unit(rng);
    body.pose_per_frame.reserve(config.frames);
    for (int f = 0; f < config.frames; ++f) {
      Motion pose;
      pose.rotation =
          Rotation::from_axis_angle(spin_axis * (config.body_rotation_step * f));
      pose.translation = center + velocity * f;
      body.pose_per_frame.push_back(pose);
    }
    scene.bodies.push_back(std::move(body));
  }
  return scene;
}

DepthMap DepthMap::empty(int h, int w) {
  DepthMap d;
  d.h = h;
  d.w = w;
  d.z = GridF::Zero(h, w);
  d.valid = GridU8::Zero(h, w);
  return d;
}

FramePairTruth render_pair(const Scene& scene, int t) {
  const int n_frames = static_cast<int>(scene.camera_trajectory.size());
  if (t < 0 || t + 1 >= n_frames) {
    throw FrameOutOfRange("render_pair: pair (" + std::to_string(t) + "," +
                          std::to_string(t + 1) + ") outside trajectory");
  }
  const CameraIntrinsics& k = scene.intrinsics;
  const int h = k.height, w = k.width;

  FramePairTruth out;
  out.flow = FlowField::zeros(h, w, false);
  out.depth_t = DepthMap::empty(h, w);
  out.depth_t1 = DepthMap::empty(h, w);
  out.gt_mask = SegMask::zeros(h, w);
  out.gt_motion =
      compose(invert(scene.camera_trajectory[t]), scene.camera_trajectory[t + 1]);

  const Motion cam_t = invert(scene.camera_trajectory[t]);
  const Motion cam_t1 = invert(scene.camera_trajectory[t + 1]);

  // z-buffer winners; ties go to the lower point index.
  Grid<int> winner_t = Grid<int>::Constant(h, w, -1);
  Grid<int> winner_t1 = Grid<int>::Constant(h, w, -1);

  int index = 0;
  auto splat = [&](const Vec3& x_t, const Vec3& x_t1, bool dynamic, int idx) {
    constexpr double kMinDepth = 1e-6;
    if (x_t1.z() > kMinDepth) {  // frame t+1 depth map
      const Vec2 p1(k.fx * x_t1.x() / x_t1.z() + k.cx,
                    k.fy * x_t1.y() / x_t1.z() + k.cy);
      const int uj = static_cast<int>(std::lround(p1.x()));
      const int vi = static_cast<int>(std::lround(p1.y()));
      if (uj >= 0 && uj < w && vi >= 0 && vi < h) {
        const float z1 = static_cast<float>(x_t1.z());
        if (!out.depth_t1.valid(vi, uj) || z1 < out.depth_t1.z(vi, uj) ||
            (z1 == out.depth_t1.z(vi, uj) && idx < winner_t1(vi, uj))) {
          out.depth_t1.z(vi, uj) = z1;
          out.depth_t1.valid(vi, uj) = 1;
          winner_t1(vi, uj) = idx;
        }
      }
    }
    if (x_t.z() <= kMinDepth || x_t1.z() <= kMinDepth) return;
    const Vec2 p0(k.fx * x_t.x() / x_t.z() + k.cx,
                  k.fy * x_t.y() / x_t.z() + k.cy);
    const int uj = static_cast<int>(std::lround(p0.x()));
    const int vi = static_cast<int>(std::lround(p0.y()));
    if (uj < 0 || uj >= w || vi < 0 || vi >= h) return;
    const float z0 = static_cast<float>(x_t.z());
    if (out.depth_t.valid(vi, uj) &&
        (z0 > out.depth_t.z(vi, uj) ||
         (z0 == out.depth_t.z(vi, uj) && idx > winner_t(vi, uj)))) {
      return;
    }
    const Vec2 p1(k.fx * x_t1.x() / x_t1.z() + k.cx,
                  k.fy * x_t1.y() / x_t1.z() + k.cy);
    out.depth_t.z(vi, uj) = z0;
    out.depth_t.valid(vi, uj) = 1;
    winner_t(vi, uj) = idx;
    out.flow.u(vi, uj) = static_cast<float>(p1.x() - p0.x());
    out.flow.v(vi, uj) = static_cast<float>(p1.y() - p0.y());
    out.flow.valid(vi, uj) = 1;
    out.gt_mask.m(vi, uj) = dynamic ? 1 : 0;
  };

  for (const Vec3& p : scene.static_points) {
    splat(apply(cam_t, p), apply(cam_t1, p), false, index++);
  }
  for (const RigidBody& body : scene.bodies) {
    const Motion& pose_t = body.pose_per_frame[t];
    const Motion& pose_t1 = body.pose_per_frame[t + 1];
    const bool moving = nonidentity(pose_t, pose_t1);
    for (const Vec3& p : body.points) {
      splat(apply(cam_t, apply(pose_t, p)), apply(cam_t1, apply(pose_t1, p)),
            moving, index++);
    }
  }
  return out;
}

SegMask recover_motion_mask(const DepthMap& depth_t, const DepthMap& depth_t1,
                            const FlowField& flow, const Motion& cam_motion,
                            const CameraIntrinsics& k, double tau) {
  if (depth_t.h != flow.h || depth_t.w != flow.w || depth_t1.h != flow.h ||
      depth_t1.w != flow.w) {
    throw DimensionMismatch("recover_motion_mask: grid dimensions differ");
  }
  if (cam_motion.up_to_scale) {
    throw InvalidConfig("recover_motion_mask: motion must carry metric scale");
  }
  const Mat3 r = cam_motion.rotation.matrix();
  const Vec3 tr = cam_motion.translation;

  // Bilinear depth lookup over valid pixels only, weights renormalized.
  auto lookup = [&](double x, double y, double* out_z) {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    double wsum = 0.0, zsum = 0.0;
    const double wts[4] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy,
                           fx * fy};
    const int xs[4] = {x0, x0 + 1, x0, x0 + 1};
    const int ys[4] = {y0, y0, y0 + 1, y0 + 1};
    for (int c = 0; c < 4; ++c) {
      if (xs[c] < 0 || xs[c] >= flow.w || ys[c] < 0 || ys[c] >= flow.h) continue;
      if (!depth_t1.valid(ys[c], xs[c])) continue;
      wsum += wts[c];
      zsum += wts[c] * depth_t1.z(ys[c], xs[c]);
    }
    if (wsum <= 0.0) return false;
    *out_z = zsum / wsum;
    return true;
  };

  SegMask mask = SegMask::zeros(flow.h, flow.w);
  for (int i = 0; i < flow.h; ++i) {
    for (int j = 0; j < flow.w; ++j) {
      if (!flow.valid(i, j) || !depth_t.valid(i, j)) continue;
      const double tx = j + flow.u(i, j);
      const double ty = i + flow.v(i, j);
      double z1 = 0.0;
      if (!lookup(tx, ty, &z1)) continue;  // unresolvable: excluded
      const Vec3 x_t = unproject(Vec2(j, i), depth_t.z(i, j), k);
      const Vec3 x_t1 = unproject(Vec2(tx, ty), z1, k);
      const Vec3 predicted = r * x_t + tr;
      if ((predicted - x_t1).norm() > tau) mask.m(i, j) = 1;
    }
  }
  return mask;
}

FlowField add_flow_noise(const FlowField& flow, double sigma_px,
                         std::uint64_t seed) {
  if (sigma_px < 0.0) throw InvalidConfig("add_flow_noise: negative sigma");
  if (sigma_px == 0.0) return flow;
  FlowField out = flow;
  Rng rng(seed);
  for (int i = 0; i < flow.h; ++i) {
    for (int j = 0; j < flow.w; ++j) {
      if (!flow.valid(i, j)) continue;
      out.u(i, j) += static_cast<float>(sigma_px * rng.normal());
      out.v(i, j) += static_cast<float>(sigma_px * rng.normal());
    }
  }
  return out;
}

}  // namespace ivo
