#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ivo/evaluation.hpp"
#include "ivo/flow.hpp"
#include "ivo/geometry.hpp"
#include "ivo/pose.hpp"
#include "ivo/segmentation.hpp"

namespace ivo {

/// Extra inputs handed to the segmenter backend: the intrinsics of the flow
/// grid and the residual scale from the pipeline config.
struct SegmenterContext {
  CameraIntrinsics intrinsics;
  double sigma_r = 1.5;
};

/// The three pluggable stages: a flow provider (called once per pair), a
/// motion segmenter conditioned on the previous motion estimate, and a pose
/// estimator over masked flow.
struct Backends {
  std::function<FlowField(int pair_index)> flow_provider;
  std::function<ProbabilityMap(const FlowField&, const Motion&,
                               const SegmenterContext&)>
      segmenter;
  std::function<MotionEstimate(const FlowField& masked_flow, const SegMask&,
                               const CameraIntrinsics&, std::uint64_t seed)>
      pose_estimator;
};

struct PipelineConfig {
  int max_iters = 4;
  double eps_rotation = 0.004363;     // rad (0.25 deg) between iterations
  double eps_translation = 0.017453;  // rad (1 deg) between unit directions
  ThresholdSchedule schedule;
  double cow_fraction = 0.25;
  // Native-resolution pixels; scaled by flow_w / native_w at run time.
  std::pair<double, double> cow_sigma_range{8.0, 32.0};
  double sigma_r = 1.5;
  std::uint64_t seed = 0;
  PoseEstimatorConfig pose;  // min_support and RANSAC settings live here
};

struct IterationRecord {
  int iteration = 0;  // 1-based
  Motion motion;
  int inlier_count = 0;
  int support_count = 0;
  double mean_sampson_px = 0.0;
  std::optional<double> z_threshold;  // absent for the cow-mask iteration
  double mask_fraction = 0.0;         // masked / valid pixels
  std::optional<double> delta_rotation;     // absent at iteration 1
  std::optional<double> delta_translation;  // absent at iteration 1
};

using IterationTrace = std::vector<IterationRecord>;

struct FrameResult {
  Motion motion;  // up-to-scale
  bool converged = false;
  IterationTrace trace;
};

/// One refinement pass over a frame pair: flow is computed once, iteration 1
/// estimates pose under a seeded cow-mask, and later iterations re-segment
/// with the previous motion, binarize at a decaying threshold, mask the flow
/// and re-estimate, stopping when the change in rotation and translation
/// direction falls below (eps_rotation, eps_translation).
FrameResult run_pair(int pair_index, const CameraIntrinsics& native_k,
                     const Backends& backends, const PipelineConfig& config);

enum class ScaleMode { kGtScale, kUnit };

struct PairOutcome {
  std::optional<FrameResult> result;
  std::string error;  // empty on success
  bool substituted = false;
};

struct SequenceResult {
  Trajectory trajectory;
  std::vector<PairOutcome> outcomes;
};

/// Chains run_pair over consecutive pairs and accumulates the motions into a
/// world-frame trajectory. kGtScale multiplies each unit translation by the
/// ground-truth step length (standard monocular evaluation); failed pairs
/// contribute identity, flagged in both the outcome and the trajectory.
SequenceResult run_sequence(int n_frames, const CameraIntrinsics& native_k,
                            const Backends& backends,
                            const PipelineConfig& config, ScaleMode scale_mode,
                            const std::vector<double>* gt_step_lengths);

/// JSON-lines serialization of a trace (one record per line) for the CLI.
std::string trace_to_jsonl(int pair_index, const IterationTrace& trace);

}  // namespace ivo
