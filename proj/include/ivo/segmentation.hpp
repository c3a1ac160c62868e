#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "ivo/flow.hpp"
#include "ivo/geometry.hpp"
#include "ivo/grid.hpp"

namespace ivo {

/// Per-pixel probability of being dynamic, clamped to [0, 1].
struct ProbabilityMap {
  int h = 0, w = 0;
  GridF p;
  GridU8 valid;

  static ProbabilityMap zeros(int h, int w, bool all_valid = true);
};

/// Binary segmentation mask; 1 = dynamic.
struct SegMask {
  int h = 0, w = 0;
  GridU8 m;

  static SegMask zeros(int h, int w);
  int count() const { return static_cast<int>((m != 0).count()); }
  double fraction() const {
    return h * w > 0 ? static_cast<double>(count()) / (h * w) : 0.0;
  }
};

/// Randomly initialized, locally connected mask: seeded Gaussian noise,
/// blurred with a sigma drawn from `sigma_range`, thresholded at the
/// empirical quantile matching `fraction` (exact up to ties).
SegMask cow_mask(std::uint64_t seed, int h, int w, double fraction,
                 std::pair<double, double> sigma_range);

/// Decaying binarization threshold: high early on to discourage inaccurate
/// masks, relaxing toward a floor as the refinement converges.
struct ThresholdSchedule {
  double z0 = 0.9;
  double gamma = 0.7;
  double z_min = 0.5;
};

/// max(z_min, z0 * gamma^(i-1)) for iteration i >= 1.
double threshold_for_iteration(const ThresholdSchedule& s, int iteration);

/// mask = 1 iff p >= z_threshold and the pixel is valid.
SegMask binarize(const ProbabilityMap& z, double z_threshold);

/// Geometric residual segmenter. With a depth grid the residual is the
/// distance between the observed flow and the rigid flow induced by
/// (motion, depth, K); without depth it is the Sampson distance of the
/// correspondence to the essential matrix of `motion`, scaled to pixels by
/// fx. Probability p = 1 - exp(-(r / sigma_r)^2).
///
/// `motion` uses the pipeline convention (pose of camera t+1 in camera t's
/// frame), i.e. exactly what the pose estimator outputs. The monocular path
/// throws DegenerateMotion when the translation is (numerically) zero, since
/// the epipolar residual is undefined under pure rotation; callers fall back
/// to the depth path or an all-static map.
ProbabilityMap segment_residual(const FlowField& flow, const Motion& motion,
                                const CameraIntrinsics& k,
                                const std::optional<GridF>& depth,
                                double sigma_r);

/// 8-bit PGM export (probabilities quantized by 255).
void write_probability_pgm(const ProbabilityMap& z, const std::string& path);
void write_mask_pgm(const SegMask& mask, const std::string& path);

}  // namespace ivo
