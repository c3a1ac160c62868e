#include "ivo/backends.hpp"

#include "ivo/rng.hpp"

namespace ivo {

Backends make_oracle_backends(const Scene& scene, const PipelineConfig& config,
                              const OracleBackendOptions& options) {
  Backends b;
  b.flow_provider = [scene, options](int pair_index) {
    FlowField flow;
    if (options.source == FlowSource::kNativeDownsample) {
      flow = downsample_flow(render_pair(scene, pair_index).flow,
                             options.downsample_factor);
    } else {
      Scene quarter = scene;
      quarter.intrinsics = rcr_adjust(
          scene.intrinsics, {0, 0, scene.intrinsics.width,
                             scene.intrinsics.height},
          scene.intrinsics.width / options.downsample_factor,
          scene.intrinsics.height / options.downsample_factor);
      flow = render_pair(quarter, pair_index).flow;
    }
    if (options.flow_noise_sigma > 0.0) {
      flow = add_flow_noise(flow, options.flow_noise_sigma,
                            mix_seed(options.noise_seed, pair_index));
    }
    return flow;
  };
  b.segmenter = [](const FlowField& flow, const Motion& motion,
                   const SegmenterContext& ctx) {
    return segment_residual(flow, motion, ctx.intrinsics, std::nullopt,
                            ctx.sigma_r);
  };
  PoseEstimatorConfig pose_config = config.pose;
  b.pose_estimator = [pose_config](const FlowField& masked, const SegMask& mask,
                                   const CameraIntrinsics& k,
                                   std::uint64_t seed) {
    PoseEstimatorConfig c = pose_config;
    c.seed = seed;
    return estimate_motion(masked, mask, k, c);
  };
  return b;
}

std::vector<double> gt_step_lengths(const Scene& scene) {
  std::vector<double> lengths;
  for (std::size_t t = 0; t + 1 < scene.camera_trajectory.size(); ++t) {
    const Motion rel = compose(invert(scene.camera_trajectory[t]),
                               scene.camera_trajectory[t + 1]);
    lengths.push_back(rel.translation.norm());
  }
  return lengths;
}

}  // namespace ivo
