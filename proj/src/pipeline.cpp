#include "ivo/pipeline.hpp"

#include <cmath>

#include "ivo/rng.hpp"

#include <nlohmann/json.hpp>

namespace ivo {

namespace {

double direction_angle(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

double masked_fraction(const SegMask& mask, const FlowField& flow) {
  int masked = 0, valid = 0;
  for (int i = 0; i < flow.h; ++i) {
    for (int j = 0; j < flow.w; ++j) {
      if (!flow.valid(i, j)) continue;
      ++valid;
      if (mask.m(i, j)) ++masked;
    }
  }
  return valid > 0 ? static_cast<double>(masked) / valid : 0.0;
}

}  // namespace

FrameResult run_pair(int pair_index, const CameraIntrinsics& native_k,
                     const Backends& backends, const PipelineConfig& config) {
  if (config.max_iters < 1 || !(config.eps_rotation > 0.0) ||
      !(config.eps_translation > 0.0)) {
    throw InvalidConfig("run_pair: bad config");
  }

  const FlowField flow = backends.flow_provider(pair_index);
  const CameraIntrinsics flow_k =
      rcr_adjust(native_k, {0, 0, native_k.width, native_k.height}, flow.w,
                 flow.h);
  const double sigma_scale =
      static_cast<double>(flow.w) / static_cast<double>(native_k.width);
  const SegmenterContext ctx{flow_k, config.sigma_r};

  FrameResult out;
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    SegMask mask;
    std::optional<double> threshold;
    if (iter == 1) {
      mask = cow_mask(config.seed ^ static_cast<std::uint64_t>(pair_index),
                      flow.h, flow.w, config.cow_fraction,
                      {std::max(0.5, config.cow_sigma_range.first * sigma_scale),
                       std::max(0.5, config.cow_sigma_range.second * sigma_scale)});
    } else {
      ProbabilityMap z;
      try {
        z = backends.segmenter(flow, out.trace.back().motion, ctx);
      } catch (const DegenerateMotion&) {
        // Epipolar residual undefined; fall back to an all-static map.
        z = ProbabilityMap::zeros(flow.h, flow.w);
        z.valid = flow.valid;
      }
      threshold = threshold_for_iteration(config.schedule, iter - 1);
      mask = binarize(z, *threshold);
      if (masked_fraction(mask, flow) > 0.99) {
        throw AllDynamic("run_pair: mask covers >99% of valid pixels at "
                         "iteration " + std::to_string(iter),
                         iter);
      }
    }

    const FlowField masked = mask_flow(flow, mask);
    MotionEstimate est;
    try {
      est = backends.pose_estimator(
          masked, mask, flow_k,
          mix_seed(config.seed,
                   static_cast<std::uint64_t>(pair_index) * 131 + iter));
    } catch (InsufficientStaticSupport& e) {
      throw InsufficientStaticSupport(e.what(), iter);
    }

    IterationRecord rec;
    rec.iteration = iter;
    rec.motion = est.motion;
    rec.inlier_count = est.inlier_count;
    rec.support_count = est.support_count;
    rec.mean_sampson_px = est.mean_sampson_px;
    rec.z_threshold = threshold;
    rec.mask_fraction = masked_fraction(mask, flow);
    if (iter >= 2) {
      const IterationRecord& prev = out.trace.back();
      rec.delta_rotation = geodesic_angle(prev.motion.rotation,
                                          est.motion.rotation);
      rec.delta_translation =
          direction_angle(prev.motion.translation, est.motion.translation);
    }
    out.trace.push_back(rec);
    out.motion = est.motion;

    if (iter >= 2 && *rec.delta_rotation < config.eps_rotation &&
        *rec.delta_translation < config.eps_translation) {
      out.converged = true;
      break;
    }
  }
  return out;
}

SequenceResult run_sequence(int n_frames, const CameraIntrinsics& native_k,
                            const Backends& backends,
                            const PipelineConfig& config, ScaleMode scale_mode,
                            const std::vector<double>* gt_step_lengths) {
  if (n_frames < 2) throw InvalidConfig("run_sequence: need at least 2 frames");
  if (scale_mode == ScaleMode::kGtScale &&
      (gt_step_lengths == nullptr ||
       gt_step_lengths->size() != static_cast<std::size_t>(n_frames - 1))) {
    throw InvalidConfig("run_sequence: gt step lengths missing or mis-sized");
  }

  SequenceResult out;
  Motion world = Motion::identity();
  out.trajectory.push_back(0.0, world);
  for (int t = 0; t + 1 < n_frames; ++t) {
    PairOutcome outcome;
    Motion step = Motion::identity();
    try {
      FrameResult r = run_pair(t, native_k, backends, config);
      const double scale = scale_mode == ScaleMode::kGtScale
                               ? (*gt_step_lengths)[static_cast<std::size_t>(t)]
                               : 1.0;
      step.rotation = r.motion.rotation;
      step.translation = r.motion.translation * scale;
      outcome.result = std::move(r);
    } catch (const Error& e) {
      outcome.error = e.what();
      outcome.substituted = true;
    }
    world = compose(world, step);
    out.trajectory.push_back(static_cast<double>(t + 1), world,
                             outcome.substituted);
    out.outcomes.push_back(std::move(outcome));
  }
  return out;
}

std::string trace_to_jsonl(int pair_index, const IterationTrace& trace) {
  std::string out;
  for (const IterationRecord& rec : trace) {
    nlohmann::json j;
    j["pair"] = pair_index;
    j["iteration"] = rec.iteration;
    const Eigen::Quaterniond& q = rec.motion.rotation.quat();
    j["rotation_wxyz"] = {q.w(), q.x(), q.y(), q.z()};
    j["translation"] = {rec.motion.translation.x(),
                        rec.motion.translation.y(),
                        rec.motion.translation.z()};
    j["inliers"] = rec.inlier_count;
    j["support"] = rec.support_count;
    j["mean_sampson_px"] = rec.mean_sampson_px;
    j["mask_fraction"] = rec.mask_fraction;
    if (rec.z_threshold) {
      j["z_threshold"] = *rec.z_threshold;
    } else {
      j["z_threshold"] = nullptr;
    }
    if (rec.delta_rotation) {
      j["delta_rotation"] = *rec.delta_rotation;
      j["delta_translation"] = *rec.delta_translation;
    } else {
      j["delta_rotation"] = nullptr;
      j["delta_translation"] = nullptr;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace ivo
