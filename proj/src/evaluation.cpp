#include "ivo/evaluation.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ivo/image_io.hpp"

namespace ivo {

void Trajectory::push_back(double t, const Motion& pose,
                           bool was_substituted) {
  timestamps.push_back(t);
  poses.push_back(pose);
  substituted.push_back(was_substituted ? 1 : 0);
}

void Trajectory::validate() const {
  if (poses.empty()) throw InvalidConfig("trajectory: empty");
  if (timestamps.size() != poses.size() ||
      substituted.size() != poses.size()) {
    throw InvalidConfig("trajectory: inconsistent field lengths");
  }
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    if (!(timestamps[i] > timestamps[i - 1])) {
      throw InvalidConfig("trajectory: timestamps not strictly increasing");
    }
  }
}

namespace {

Eigen::Matrix3Xd positions(const Trajectory& t) {
  Eigen::Matrix3Xd p(3, t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    p.col(static_cast<Eigen::Index>(i)) = t.poses[i].translation;
  }
  return p;
}

}  // namespace

Similarity umeyama_align(const Trajectory& est, const Trajectory& gt,
                         bool with_scale) {
  if (est.size() != gt.size()) {
    throw DimensionMismatch("umeyama_align: trajectory lengths differ");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(est.size());
  if (n < 3) throw DegenerateSpread("umeyama_align: need at least 3 poses");

  const Eigen::Matrix3Xd x = positions(est);  // source
  const Eigen::Matrix3Xd y = positions(gt);   // target
  const Vec3 mx = x.rowwise().mean();
  const Vec3 my = y.rowwise().mean();
  const Eigen::Matrix3Xd xc = x.colwise() - mx;
  const Eigen::Matrix3Xd yc = y.colwise() - my;

  const double var_x = xc.squaredNorm() / n;
  const Mat3 sigma = yc * xc.transpose() / n;
  Eigen::JacobiSVD<Mat3> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sv = svd.singularValues();
  if (!(sv(1) > 1e-12 * std::max(sv(0), 1e-12))) {
    throw DegenerateSpread("umeyama_align: point spread has covariance rank < 2");
  }

  Vec3 s = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    s(2) = -1.0;
  }
  const Mat3 r =
      svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();

  Similarity g;
  g.rotation = Rotation::from_matrix(r);
  g.scale = with_scale ? sv.dot(s) / var_x : 1.0;
  g.translation = my - g.scale * (r * mx);
  return g;
}

double ate_rmse(const Trajectory& est, const Trajectory& gt, AlignMode mode) {
  if (est.size() != gt.size()) {
    throw DimensionMismatch("ate_rmse: trajectory lengths differ");
  }
  if (est.size() == 0) throw InvalidConfig("ate_rmse: empty trajectories");
  Similarity g;
  if (mode != AlignMode::kNone) {
    g = umeyama_align(est, gt, mode == AlignMode::kSimilarity);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    sum += (gt.poses[i].translation - g(est.poses[i].translation)).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(est.size()));
}

namespace {

std::string format_double(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace

std::string format_trajectory(const Trajectory& traj,
                              TrajectoryFormat format) {
  std::string out;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Motion& p = traj.poses[i];
    if (format == TrajectoryFormat::kTum) {
      const Eigen::Quaterniond& q = p.rotation.quat();
      out += format_double(traj.timestamps[i], "%.6f");
      for (double v : {p.translation.x(), p.translation.y(),
                       p.translation.z(), q.x(), q.y(), q.z(), q.w()}) {
        out += ' ';
        out += format_double(v, "%.12f");
      }
    } else {
      const Mat3 r = p.rotation.matrix();
      bool first = true;
      for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 4; ++col) {
          const double v = col < 3 ? r(row, col) : p.translation(row);
          if (!first) out += ' ';
          out += format_double(v, "%.12e");
          first = false;
        }
      }
    }
    out += '\n';
  }
  return out;
}

void write_trajectory(const Trajectory& traj, const std::string& path,
                      TrajectoryFormat format) {
  write_file_atomic(path, format_trajectory(traj, format));
}

Trajectory parse_trajectory(const std::string& text, TrajectoryFormat format) {
  Trajectory traj;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  int index = 0;
  while (std::getline(is, line)) {
    ++line_no;
    // Strip trailing CR and skip comments / blank lines.
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;

    std::istringstream ls(line);
    if (format == TrajectoryFormat::kTum) {
      double ts, tx, ty, tz, qx, qy, qz, qw;
      if (!(ls >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
        throw ParseError("trajectory: malformed TUM line", line_no);
      }
      Motion pose;
      const Eigen::Quaterniond q(qw, qx, qy, qz);
      if (q.norm() < 1e-9) {
        throw ParseError("trajectory: zero quaternion", line_no);
      }
      pose.rotation = Rotation(q);
      pose.translation = Vec3(tx, ty, tz);
      traj.push_back(ts, pose);
    } else {
      double m[12];
      for (int i = 0; i < 12; ++i) {
        if (!(ls >> m[i])) {
          throw ParseError("trajectory: malformed KITTI line", line_no);
        }
      }
      Mat3 r;
      r << m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10];
      Motion pose;
      pose.rotation = Rotation::from_matrix(r);
      pose.translation = Vec3(m[3], m[7], m[11]);
      traj.push_back(static_cast<double>(index), pose);
    }
    ++index;
  }
  traj.validate();
  return traj;
}

Trajectory read_trajectory(const std::string& path, TrajectoryFormat format) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("read_trajectory: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_trajectory(ss.str(), format);
}

}  // namespace ivo
