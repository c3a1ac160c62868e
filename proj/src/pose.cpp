#include "ivo/pose.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ivo/epipolar.hpp"
#include "ivo/rng.hpp"

namespace ivo {

namespace {

using Mat3X = Eigen::Matrix3Xd;

// Sampson distances (not squared) of all correspondences, normalized units.
Eigen::VectorXd sampson_all(const Mat3& e, const Mat3X& x0, const Mat3X& x1) {
  const Mat3X ex0 = e * x0;
  const Mat3X etx1 = e.transpose() * x1;
  const Eigen::ArrayXd c = (x1.array() * ex0.array()).colwise().sum();
  const Eigen::ArrayXd denom =
      ex0.row(0).array().square() + ex0.row(1).array().square() +
      etx1.row(0).array().square() + etx1.row(1).array().square();
  return (c.abs() / denom.sqrt().max(1e-300)).matrix();
}

double msac_cost(const Eigen::VectorXd& d, double thresh) {
  const double t2 = thresh * thresh;
  return d.array().square().min(t2).sum();
}

// Least-squares essential matrix from >= 8 correspondences, with the rank-2
// unit-singular-value constraint enforced by SVD projection.
bool essential_8pt(const Mat3X& x0, const Mat3X& x1,
                   const std::vector<int>& idx, Mat3* e_out) {
  Eigen::Matrix<double, Eigen::Dynamic, 9> a(idx.size(), 9);
  for (size_t r = 0; r < idx.size(); ++r) {
    const Vec3 p = x0.col(idx[r]);
    const Vec3 q = x1.col(idx[r]);
    a.row(static_cast<Eigen::Index>(r)) << q.x() * p.x(), q.x() * p.y(),
        q.x() * p.z(), q.y() * p.x(), q.y() * p.y(), q.y() * p.z(),
        q.z() * p.x(), q.z() * p.y(), q.z() * p.z();
  }
  Eigen::JacobiSVD<Eigen::Matrix<double, Eigen::Dynamic, 9>> svd(
      a, Eigen::ComputeFullV);
  if (svd.rank() < 1) return false;
  const Eigen::Matrix<double, 9, 1> e = svd.matrixV().col(8);
  Mat3 e_raw;
  e_raw << e(0), e(1), e(2), e(3), e(4), e(5), e(6), e(7), e(8);
  Eigen::JacobiSVD<Mat3> svd3(e_raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd3.matrixU();
  Mat3 v = svd3.matrixV();
  if (u.determinant() < 0) u = -u;
  if (v.determinant() < 0) v = -v;
  *e_out = u * Eigen::Vector3d(1, 1, 0).asDiagonal() * v.transpose();
  return true;
}

struct Transport {
  Mat3 r;
  Vec3 t;  // unit
};

// Depth of x0 along its ray for the hypothesis X1 = R X0 + t.
inline double triangulate_depth0(const Mat3& r, const Vec3& t, const Vec3& x0,
                                 const Vec3& x1) {
  const Vec3 a = x1.cross(r * x0);
  const double n2 = a.squaredNorm();
  if (n2 < 1e-300) return 0.0;
  return -a.dot(x1.cross(t)) / n2;
}

// Chooses among the four (R, t) decompositions of E by counting
// correspondences that triangulate in front of both cameras.
Transport resolve_by_cheirality(const Mat3& e, const Mat3X& x0,
                                const Mat3X& x1,
                                const std::vector<int>& inliers) {
  Eigen::JacobiSVD<Mat3> svd(e, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  if (u.determinant() < 0) u = -u;
  if (v.determinant() < 0) v = -v;
  Mat3 w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Mat3 r1 = u * w * v.transpose();
  const Mat3 r2 = u * w.transpose() * v.transpose();
  const Vec3 t = u.col(2);
  const Transport candidates[4] = {{r1, t}, {r1, -t}, {r2, t}, {r2, -t}};

  int best = 0, best_votes = -1;
  for (int c = 0; c < 4; ++c) {
    int votes = 0;
    for (int i : inliers) {
      const Vec3 p0 = x0.col(i);
      const Vec3 p1 = x1.col(i);
      const double z0 =
          triangulate_depth0(candidates[c].r, candidates[c].t, p0, p1);
      if (z0 <= 0.0) continue;
      const double z1 = (candidates[c].r * (z0 * p0) + candidates[c].t).z();
      if (z1 > 0.0) ++votes;
    }
    if (votes > best_votes) {
      best_votes = votes;
      best = c;
    }
  }
  return candidates[best];
}

// Gauss-Newton on the inlier Sampson cost. 5 parameters: rotation update
// (axis-angle, left-multiplied) and translation update in the unit-sphere
// tangent basis. Numeric central-difference Jacobian; step halving keeps the
// iteration monotone.
Transport refine_gauss_newton(Transport m, const Mat3X& x0, const Mat3X& x1,
                              const std::vector<int>& inliers, int max_iters) {
  const int n = static_cast<int>(inliers.size());
  if (n < 8 || max_iters < 1) return m;
  Mat3X p0(3, n), p1(3, n);
  for (int i = 0; i < n; ++i) {
    p0.col(i) = x0.col(inliers[i]);
    p1.col(i) = x1.col(inliers[i]);
  }

  auto tangent_basis = [](const Vec3& t) {
    Vec3 ref = std::abs(t.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    const Vec3 b1 = t.cross(ref).normalized();
    const Vec3 b2 = t.cross(b1).normalized();
    return std::make_pair(b1, b2);
  };
  auto apply_params = [&](const Transport& base,
                          const Eigen::Matrix<double, 5, 1>& d) {
    Transport out;
    out.r = Rotation::from_axis_angle(d.head<3>()).matrix() * base.r;
    const auto [b1, b2] = tangent_basis(base.t);
    out.t = (base.t + d(3) * b1 + d(4) * b2).normalized();
    return out;
  };
  auto residuals = [&](const Transport& tr) {
    return sampson_all(essential_from_transport(tr.r, tr.t), p0, p1);
  };

  double cost = residuals(m).squaredNorm();
  const double h = 1e-7;
  for (int it = 0; it < max_iters; ++it) {
    Eigen::MatrixXd jac(n, 5);
    for (int p = 0; p < 5; ++p) {
      Eigen::Matrix<double, 5, 1> d = Eigen::Matrix<double, 5, 1>::Zero();
      d(p) = h;
      const Eigen::VectorXd plus = residuals(apply_params(m, d));
      d(p) = -h;
      const Eigen::VectorXd minus = residuals(apply_params(m, d));
      jac.col(p) = (plus - minus) / (2.0 * h);
    }
    const Eigen::VectorXd r = residuals(m);
    const Eigen::Matrix<double, 5, 5> jtj =
        jac.transpose() * jac +
        1e-12 * Eigen::Matrix<double, 5, 5>::Identity();
    const Eigen::Matrix<double, 5, 1> step =
        jtj.ldlt().solve(-jac.transpose() * r);
    if (!step.allFinite()) break;

    double alpha = 1.0;
    bool accepted = false;
    for (int half = 0; half < 10; ++half) {
      const Transport trial = apply_params(m, alpha * step);
      const double trial_cost = residuals(trial).squaredNorm();
      if (trial_cost < cost) {
        m = trial;
        cost = trial_cost;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
  }
  return m;
}

}  // namespace

MotionEstimate estimate_motion(const FlowField& masked_flow,
                               const SegMask& mask, const CameraIntrinsics& k,
                               const PoseEstimatorConfig& config) {
  if (masked_flow.h != mask.h || masked_flow.w != mask.w) {
    throw DimensionMismatch("estimate_motion: flow and mask dimensions differ");
  }
  if (config.ransac_iters < 1 || config.min_support < 8 ||
      !(config.inlier_thresh_px > 0.0)) {
    throw InvalidConfig("estimate_motion: bad config");
  }

  // Correspondences x <-> x + flow on valid, unmasked pixels, normalized via
  // the intrinsics layer of this grid.
  const IntrinsicsLayer layer =
      make_intrinsics_layer(k, masked_flow.h, masked_flow.w);
  std::vector<double> flow_mag;
  std::vector<Vec3> pts0, pts1;
  for (int i = 0; i < masked_flow.h; ++i) {
    for (int j = 0; j < masked_flow.w; ++j) {
      if (!masked_flow.valid(i, j) || mask.m(i, j)) continue;
      pts0.emplace_back(layer.x(i, j), layer.y(i, j), 1.0);
      pts1.emplace_back((j + masked_flow.u(i, j) - k.cx) / k.fx,
                        (i + masked_flow.v(i, j) - k.cy) / k.fy, 1.0);
      flow_mag.push_back(std::hypot(masked_flow.u(i, j), masked_flow.v(i, j)));
    }
  }
  const int support = static_cast<int>(pts0.size());
  if (support < config.min_support) {
    throw InsufficientStaticSupport(
        "estimate_motion: " + std::to_string(support) +
        " unmasked valid pixels, need " + std::to_string(config.min_support));
  }

  // Uniform stride subsample for the RANSAC search.
  const int m = std::min(support, std::max(config.max_correspondences, 8));
  Mat3X x0(3, m), x1(3, m);
  std::vector<double> sub_mag(m);
  for (int i = 0; i < m; ++i) {
    const int src = static_cast<int>(
        static_cast<std::int64_t>(i) * support / m);
    x0.col(i) = pts0[src];
    x1.col(i) = pts1[src];
    sub_mag[i] = flow_mag[src];
  }

  const double thresh = config.inlier_thresh_px / k.fx;
  Rng rng(config.seed);
  Mat3 best_e = Mat3::Zero();
  double best_cost = std::numeric_limits<double>::infinity();
  bool have_model = false;
  std::vector<int> sample(8);
  for (int iter = 0; iter < config.ransac_iters; ++iter) {
    for (int s = 0; s < 8; ++s) {
      while (true) {
        const int c = rng.uniform_int(m);
        bool dup = false;
        for (int p = 0; p < s; ++p) dup |= (sample[p] == c);
        if (!dup) {
          sample[s] = c;
          break;
        }
      }
    }
    Mat3 e;
    if (!essential_8pt(x0, x1, sample, &e)) continue;
    const double cost = msac_cost(sampson_all(e, x0, x1), thresh);
    if (cost < best_cost) {
      best_cost = cost;
      best_e = e;
      have_model = true;
    }
  }
  if (!have_model) {
    throw DegenerateMotion("estimate_motion: no valid RANSAC hypothesis");
  }

  Eigen::VectorXd d = sampson_all(best_e, x0, x1);
  std::vector<int> inliers;
  std::vector<double> inlier_mag;
  for (int i = 0; i < m; ++i) {
    if (d(i) <= thresh) {
      inliers.push_back(i);
      inlier_mag.push_back(sub_mag[i]);
    }
  }
  if (inliers.empty()) {
    throw DegenerateMotion("estimate_motion: best model has no inliers");
  }
  std::nth_element(inlier_mag.begin(), inlier_mag.begin() + inlier_mag.size() / 2,
                   inlier_mag.end());
  if (inlier_mag[inlier_mag.size() / 2] < 0.05) {
    throw DegenerateMotion(
        "estimate_motion: inlier flow is ~zero; translation direction "
        "unobservable");
  }

  Transport transport = resolve_by_cheirality(best_e, x0, x1, inliers);
  transport = refine_gauss_newton(transport, x0, x1, inliers,
                                  config.refine_iters);

  // Final statistics over the full support.
  Mat3X f0(3, support), f1(3, support);
  for (int i = 0; i < support; ++i) {
    f0.col(i) = pts0[i];
    f1.col(i) = pts1[i];
  }
  const Mat3 e_final = essential_from_transport(transport.r, transport.t);
  const Eigen::VectorXd d_final = sampson_all(e_final, f0, f1);
  int inlier_count = 0;
  double residual_sum = 0.0;
  for (int i = 0; i < support; ++i) {
    if (d_final(i) <= thresh) {
      ++inlier_count;
      residual_sum += d_final(i);
    }
  }

  MotionEstimate est;
  est.support_count = support;
  est.inlier_count = inlier_count;
  est.mean_sampson_px =
      inlier_count > 0 ? residual_sum / inlier_count * k.fx : 0.0;
  // Transport convention -> pipeline convention (pose of t+1 in frame t).
  est.motion.rotation = Rotation::from_matrix(transport.r.transpose());
  est.motion.translation =
      (-(transport.r.transpose() * transport.t)).normalized();
  est.motion.up_to_scale = true;
  return est;
}

double motion_loss(const Motion& est, const Motion& gt) {
  constexpr double kEps = 1e-6;
  const Vec3 te = est.translation / std::max(est.translation.norm(), kEps);
  const Vec3 tg = gt.translation / std::max(gt.translation.norm(), kEps);
  return (te - tg).norm() +
         (est.rotation.axis_angle() - gt.rotation.axis_angle()).norm();
}

double flow_loss(const FlowField& est, const FlowField& gt) {
  if (est.h != gt.h || est.w != gt.w) {
    throw DimensionMismatch("flow_loss: dimensions differ");
  }
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < est.h; ++i) {
    for (int j = 0; j < est.w; ++j) {
      if (!est.valid(i, j) || !gt.valid(i, j)) continue;
      sum += std::abs(static_cast<double>(est.u(i, j)) - gt.u(i, j)) +
             std::abs(static_cast<double>(est.v(i, j)) - gt.v(i, j));
      ++n;
    }
  }
  if (n == 0) throw NoOverlap("flow_loss: no jointly valid pixel");
  return sum / n;
}

double seg_loss(const ProbabilityMap& z, const SegMask& gt) {
  if (z.h != gt.h || z.w != gt.w) {
    throw DimensionMismatch("seg_loss: dimensions differ");
  }
  double sum = 0.0;
  int n = 0;
  for (int i = 0; i < z.h; ++i) {
    for (int j = 0; j < z.w; ++j) {
      if (!z.valid(i, j)) continue;
      const double p =
          std::clamp(static_cast<double>(z.p(i, j)), 1e-7, 1.0 - 1e-7);
      sum += gt.m(i, j) ? -std::log(p) : -std::log(1.0 - p);
      ++n;
    }
  }
  if (n == 0) throw NoOverlap("seg_loss: no valid pixel");
  return sum / n;
}

double aggregate_loss(double flow, double seg, double motion,
                      const LossWeights& w) {
  return w.lambda1 * flow + w.lambda2 * seg + motion;
}

}  // namespace ivo
