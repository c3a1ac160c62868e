#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ivo/geometry.hpp"

namespace ivo {

/// Timestamped world-from-camera pose sequence. `substituted` marks poses
/// whose relative motion had to be replaced by identity (failed pairs).
struct Trajectory {
  std::vector<double> timestamps;
  std::vector<Motion> poses;
  std::vector<std::uint8_t> substituted;

  std::size_t size() const { return poses.size(); }
  void push_back(double t, const Motion& pose, bool was_substituted = false);

  /// Throws InvalidConfig unless timestamps are strictly increasing and at
  /// least one pose is present.
  void validate() const;
};

/// Similarity transform g(x) = scale * R x + T.
struct Similarity {
  double scale = 1.0;
  Rotation rotation;
  Vec3 translation = Vec3::Zero();

  Vec3 operator()(const Vec3& x) const {
    return scale * (rotation * x) + translation;
  }
};

/// Least-squares similarity (rigid when with_scale = false) minimizing
/// sum || gt_i - (s R est_i + T) ||^2 over positions. Requires equal lengths
/// >= 3 and a point spread of covariance rank >= 2.
Similarity umeyama_align(const Trajectory& est, const Trajectory& gt,
                         bool with_scale);

enum class AlignMode { kNone, kRigid, kSimilarity };

/// RMSE of position residuals after alignment (kNone skips alignment).
double ate_rmse(const Trajectory& est, const Trajectory& gt, AlignMode mode);

enum class TrajectoryFormat { kTum, kKitti };

/// TUM:   "timestamp tx ty tz qx qy qz qw" per line.
/// KITTI: 12 floats per line, row-major 3x4 world-from-camera matrix;
///        timestamps are the line index.
Trajectory read_trajectory(const std::string& path, TrajectoryFormat format);
void write_trajectory(const Trajectory& traj, const std::string& path,
                      TrajectoryFormat format);
std::string format_trajectory(const Trajectory& traj, TrajectoryFormat format);
Trajectory parse_trajectory(const std::string& text, TrajectoryFormat format);

}  // namespace ivo
