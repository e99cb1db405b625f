// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/slam/metrics.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sgslam {

double compute_ate(const Trajectory& estimated, const Trajectory& ground_truth) {
  if (estimated.size() != ground_truth.size())
    throw std::invalid_argument("trajectory lengths differ");
  const std::size_t n = estimated.size();
  if (n == 0) throw std::invalid_argument("empty trajectory");
  std::vector<Vec3> a(n), b(n);
  Vec3 ca = Vec3::Zero(), cb = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    if (estimated[i].frame != ground_truth[i].frame)
      throw std::invalid_argument("trajectory frame indices differ");
    a[i] = estimated[i].pose.center();
    b[i] = ground_truth[i].pose.center();
    ca += a[i];
    cb += b[i];
  }
  ca /= static_cast<double>(n);
  cb /= static_cast<double>(n);

  Mat3 h = Mat3::Zero();
  for (std::size_t i = 0; i < n; ++i) h += (a[i] - ca) * (b[i] - cb).transpose();
  const Eigen::JacobiSVD<Mat3> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Mat3 r = svd.matrixV() * d * svd.matrixU().transpose();

  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) sq += (r * (a[i] - ca) + cb - b[i]).squaredNorm();
  return 100.0 * std::sqrt(sq / static_cast<double>(n));
}

double compute_psnr(const ImageRGB& rendered, const ImageRGB& reference) {
  if (rendered.width != reference.width || rendered.height != reference.height)
    throw std::invalid_argument("image sizes differ");
  double sq = 0.0;
  for (std::size_t i = 0; i < rendered.pixels.size(); ++i)
    sq += (rendered.pixels[i] - reference.pixels[i]).squaredNorm();
  const double mse = sq / (3.0 * static_cast<double>(rendered.pixels.size()));
  if (mse == 0.0) return kPsnrInfinity;
  return 10.0 * std::log10(1.0 / mse);
}

PoseError pose_error(const CameraPose& estimated, const CameraPose& truth) {
  PoseError e;
  e.translation_m = (estimated.center() - truth.center()).norm();
  const Quat dq = estimated.rotation * truth.rotation.conjugate();
  e.rotation_deg = so3_log(dq).norm() * 180.0 / std::numbers::pi;
  return e;
}

}  // namespace sgslam
