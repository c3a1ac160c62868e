#pragma once

#include <cstdint>

#include "ivo/pipeline.hpp"
#include "ivo/simulator.hpp"

namespace ivo {

enum class FlowSource {
  kNativeDownsample,  // render at native resolution, block-downsample by 4
  kQuarterDirect,     // render straight onto the quarter grid
};

struct OracleBackendOptions {
  FlowSource source = FlowSource::kNativeDownsample;
  int downsample_factor = 4;
  double flow_noise_sigma = 0.0;  // flow-grid pixels
  std::uint64_t noise_seed = 0;
};

/// Wires the simulator's oracle flow, the geometric residual segmenter, and
/// the RANSAC pose estimator into a backend set for the pipeline.
Backends make_oracle_backends(const Scene& scene, const PipelineConfig& config,
                              const OracleBackendOptions& options = {});

/// Norms of the ground-truth per-pair translations, for ScaleMode::kGtScale.
std::vector<double> gt_step_lengths(const Scene& scene);

}  // namespace ivo
