#include "ivo/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ivo/epipolar.hpp"
#include "ivo/image_io.hpp"
#include "ivo/rng.hpp"

namespace ivo {

ProbabilityMap ProbabilityMap::zeros(int h, int w, bool all_valid) {
  ProbabilityMap z;
  z.h = h;
  z.w = w;
  z.p = GridF::Zero(h, w);
  z.valid = GridU8::Constant(h, w, all_valid ? 1 : 0);
  return z;
}

SegMask SegMask::zeros(int h, int w) {
  SegMask s;
  s.h = h;
  s.w = w;
  s.m = GridU8::Zero(h, w);
  return s;
}

namespace {

// Separable Gaussian blur with reflected borders.
GridD gaussian_blur(const GridD& img, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    kernel[i + radius] = v;
    sum += v;
  }
  for (double& v : kernel) v /= sum;

  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  auto reflect = [](int i, int n) {
    while (i < 0 || i >= n) {
      if (i < 0) i = -i - 1;
      if (i >= n) i = 2 * n - i - 1;
    }
    return i;
  };

  GridD tmp(h, w), out(h, w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[k + radius] * img(i, reflect(j + k, w));
      }
      tmp(i, j) = acc;
    }
  }
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[k + radius] * tmp(reflect(i + k, h), j);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

}  // namespace

SegMask cow_mask(std::uint64_t seed, int h, int w, double fraction,
                 std::pair<double, double> sigma_range) {
  if (fraction < 0.0 || fraction > 1.0) {
    throw InvalidConfig("cow_mask: fraction outside [0,1]");
  }
  if (!(sigma_range.first > 0.0) || sigma_range.second < sigma_range.first) {
    throw InvalidConfig("cow_mask: bad sigma range");
  }
  SegMask mask = SegMask::zeros(h, w);
  const int n = h * w;
  const int target = static_cast<int>(std::lround(fraction * n));
  if (target <= 0) return mask;

  Rng rng(seed);
  const double sigma = rng.uniform(sigma_range.first, sigma_range.second);
  GridD noise(h, w);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) noise(i, j) = rng.normal();
  }
  const GridD blurred = gaussian_blur(noise, sigma);

  if (target >= n) {
    mask.m.setConstant(1);
    return mask;
  }
  // Threshold at the (n - target)-th order statistic so that `target` pixels
  // end up masked, up to ties.
  std::vector<double> values(blurred.data(), blurred.data() + n);
  std::nth_element(values.begin(), values.begin() + (n - target),
                   values.end());
  const double threshold = values[n - target];
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      if (blurred(i, j) >= threshold) mask.m(i, j) = 1;
    }
  }
  return mask;
}

double threshold_for_iteration(const ThresholdSchedule& s, int iteration) {
  if (iteration < 1) {
    throw InvalidConfig("threshold_for_iteration: iteration must be >= 1");
  }
  return std::max(s.z_min, s.z0 * std::pow(s.gamma, iteration - 1));
}

SegMask binarize(const ProbabilityMap& z, double z_threshold) {
  if (!(z_threshold > 0.0) || z_threshold > 1.0) {
    throw InvalidConfig("binarize: threshold outside (0,1]");
  }
  SegMask mask = SegMask::zeros(z.h, z.w);
  for (int i = 0; i < z.h; ++i) {
    for (int j = 0; j < z.w; ++j) {
      if (z.valid(i, j) && z.p(i, j) >= z_threshold) mask.m(i, j) = 1;
    }
  }
  return mask;
}

ProbabilityMap segment_residual(const FlowField& flow, const Motion& motion,
                                const CameraIntrinsics& k,
                                const std::optional<GridF>& depth,
                                double sigma_r) {
  if (depth && (depth->rows() != flow.h || depth->cols() != flow.w)) {
    throw DimensionMismatch("segment_residual: depth grid size mismatch");
  }
  if (flow.valid_count() < 1) {
    throw InvalidConfig("segment_residual: no valid flow");
  }
  if (!(sigma_r > 0.0)) {
    throw InvalidConfig("segment_residual: sigma_r must be positive");
  }

  ProbabilityMap z = ProbabilityMap::zeros(flow.h, flow.w, false);
  const double inv_sigma2 = 1.0 / (sigma_r * sigma_r);
  auto prob = [&](double r) {
    return static_cast<float>(1.0 - std::exp(-r * r * inv_sigma2));
  };

  if (depth) {
    // Point-transport direction of the relative motion.
    const Motion transport = invert(motion);
    const Mat3 r = transport.rotation.matrix();
    const Vec3 t = transport.translation;
    for (int i = 0; i < flow.h; ++i) {
      for (int j = 0; j < flow.w; ++j) {
        if (!flow.valid(i, j)) continue;
        const float d = (*depth)(i, j);
        if (!(d > 0.0f)) continue;
        const Vec3 x0 = unproject(Vec2(j, i), d, k);
        const Vec3 x1 = r * x0 + t;
        double residual;
        if (x1.z() <= 1e-9) {
          residual = 1e6;  // transported behind the camera: not static
        } else {
          const Vec2 rigid =
              Vec2(k.fx * x1.x() / x1.z() + k.cx, k.fy * x1.y() / x1.z() + k.cy) -
              Vec2(j, i);
          residual = (Vec2(flow.u(i, j), flow.v(i, j)) - rigid).norm();
        }
        z.p(i, j) = prob(residual);
        z.valid(i, j) = 1;
      }
    }
    return z;
  }

  if (motion.translation.norm() < 1e-9) {
    throw DegenerateMotion(
        "segment_residual: epipolar residual undefined for pure rotation");
  }
  const Mat3 e = essential_from_motion(motion);
  for (int i = 0; i < flow.h; ++i) {
    for (int j = 0; j < flow.w; ++j) {
      if (!flow.valid(i, j)) continue;
      const Vec3 x0((j - k.cx) / k.fx, (i - k.cy) / k.fy, 1.0);
      const Vec3 x1((j + flow.u(i, j) - k.cx) / k.fx,
                    (i + flow.v(i, j) - k.cy) / k.fy, 1.0);
      const double residual = sampson_distance(e, x0, x1) * k.fx;
      z.p(i, j) = prob(residual);
      z.valid(i, j) = 1;
    }
  }
  return z;
}

void write_probability_pgm(const ProbabilityMap& z, const std::string& path) {
  GridU8 img(z.h, z.w);
  for (int i = 0; i < z.h; ++i) {
    for (int j = 0; j < z.w; ++j) {
      img(i, j) = static_cast<std::uint8_t>(
          std::lround(std::clamp(z.p(i, j), 0.0f, 1.0f) * 255.0f));
    }
  }
  write_pgm8(img, path);
}

void write_mask_pgm(const SegMask& mask, const std::string& path) {
  GridU8 img(mask.h, mask.w);
  for (int i = 0; i < mask.h; ++i) {
    for (int j = 0; j < mask.w; ++j) img(i, j) = mask.m(i, j) ? 255 : 0;
  }
  write_pgm8(img, path);
}

}  // namespace ivo
