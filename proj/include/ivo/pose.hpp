#pragma once

#include <cstdint>

#include "ivo/flow.hpp"
#include "ivo/geometry.hpp"
#include "ivo/segmentation.hpp"

namespace ivo {

/// Up-to-scale ego-motion estimate with its RANSAC support statistics.
struct MotionEstimate {
  Motion motion;  // up_to_scale = true, unit translation
  int inlier_count = 0;
  int support_count = 0;
  double mean_sampson_px = 0.0;  // over final inliers, in pixels
};

struct PoseEstimatorConfig {
  int ransac_iters = 500;
  double inlier_thresh_px = 1.0;  // converted to normalized units via 1/fx
  int min_support = 50;
  int refine_iters = 10;
  std::uint64_t seed = 0;
  // RANSAC hypothesis search and scoring run on at most this many
  // correspondences (uniform stride); final statistics use the full support.
  int max_correspondences = 2000;
};

/// Two-view ego-motion from masked flow. Builds correspondences on valid,
/// unmasked pixels, normalizes by K, runs seeded RANSAC over 8-point
/// essential-matrix hypotheses scored by truncated Sampson distance,
/// resolves the 4-fold decomposition by cheirality voting, and refines
/// (R, t) with Gauss-Newton on the inlier Sampson cost.
///
/// Returns the motion in the pipeline convention (pose of camera t+1 in
/// camera t's frame) with unit-norm translation.
///
/// Throws InsufficientStaticSupport when fewer than min_support pixels
/// remain, and DegenerateMotion when the best model's inlier flow is
/// essentially zero (median magnitude < 0.05 px), where the translation
/// direction is unobservable.
MotionEstimate estimate_motion(const FlowField& masked_flow,
                               const SegMask& mask, const CameraIntrinsics& k,
                               const PoseEstimatorConfig& config);

struct LossWeights {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
};

/// || T_est/max(||T_est||,eps) - T_gt/max(||T_gt||,eps) || + || r_est - r_gt ||
/// with eps = 1e-6 and r the axis-angle 3-vector of each rotation.
double motion_loss(const Motion& est, const Motion& gt);

/// Mean over jointly valid pixels of |du| + |dv|.
double flow_loss(const FlowField& est, const FlowField& gt);

/// Mean binary cross entropy with probabilities clamped to [1e-7, 1-1e-7].
double seg_loss(const ProbabilityMap& z, const SegMask& gt);

/// lambda1 * flow + lambda2 * seg + motion.
double aggregate_loss(double flow, double seg, double motion,
                      const LossWeights& w);

}  // namespace ivo
