// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/core/gaussian_ops.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace sgslam {

Mat3 build_covariance(const Vec3& log_scale, const Quat& rotation) {
  const Mat3 r = rotation.normalized().toRotationMatrix();
  const Vec3 var = (2.0 * log_scale).array().exp();
  return r * var.asDiagonal() * r.transpose();
}

CameraSpaceGaussian to_camera_space(const Gaussian3D& g, const CameraPose& cam) {
  CameraSpaceGaussian out;
  const Mat3 w = cam.rotation_matrix();
  out.p_cam = w * g.mean_world + cam.translation;
  const Mat3 cov_cam = w * build_covariance(g.log_scale, g.rotation) * w.transpose();
  out.cov_cam = 0.5 * (cov_cam + cov_cam.transpose());

  const double x = out.p_cam.x();
  const double y = out.p_cam.y();
  const double z = out.p_cam.z();
  const auto& in = cam.intrinsics;
  out.jacobian << in.fx / z, 0.0, -in.fx * x / (z * z),
                  0.0, in.fy / z, -in.fy * y / (z * z);
  const Mat2 cov2d = out.jacobian * out.cov_cam * out.jacobian.transpose();
  out.cov2d = 0.5 * (cov2d + cov2d.transpose());
  return out;
}

ProjectionResult project_gaussian(const Gaussian3D& g, std::size_t scene_index,
                                  const CameraPose& cam, double near, double sigma_extent) {
  ProjectionResult result;
  const Vec3 p_cam = cam.to_camera(g.mean_world);
  if (!(p_cam.z() > near)) {
    result.outcome = ProjectionOutcome::kBehindNearPlane;
    return result;
  }

  const CameraSpaceGaussian cs = to_camera_space(g, cam);
  const Mat2& cov = cs.cov2d;
  const double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
  if (!(det >= kMinCovDeterminant)) {
    result.outcome = ProjectionOutcome::kDegenerate;
    return result;
  }

  const auto& in = cam.intrinsics;
  const Vec2 mean(in.fx * cs.p_cam.x() / cs.p_cam.z() + in.cx,
                  in.fy * cs.p_cam.y() / cs.p_cam.z() + in.cy);

  // Largest eigenvalue of the symmetric 2x2 covariance.
  const double mid = 0.5 * (cov(0, 0) + cov(1, 1));
  const double lambda_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
  const double radius = sigma_extent * std::sqrt(lambda_max);

  // Pixels whose centers (x + 0.5) lie within [mean - r, mean + r].
  PixelRect box;
  box.x0 = std::max(0, static_cast<int>(std::ceil(mean.x() - radius - 0.5)));
  box.x1 = std::min(cam.width - 1, static_cast<int>(std::floor(mean.x() + radius - 0.5)));
  box.y0 = std::max(0, static_cast<int>(std::ceil(mean.y() - radius - 0.5)));
  box.y1 = std::min(cam.height - 1, static_cast<int>(std::floor(mean.y() + radius - 0.5)));
  if (!std::isfinite(radius) || !std::isfinite(mean.x()) || !std::isfinite(mean.y()) ||
      mean.x() - radius > cam.width || mean.x() + radius < 0.0 ||
      mean.y() - radius > cam.height || mean.y() + radius < 0.0 || box.empty()) {
    result.outcome = ProjectionOutcome::kOutsideImage;
    return result;
  }

  Splat2D s;
  s.source_id = g.id;
  s.source_index = scene_index;
  s.mean_px = mean;
  s.conic << cov(1, 1) / det, -cov(0, 1) / det,
             -cov(1, 0) / det, cov(0, 0) / det;
  s.depth = cs.p_cam.z();
  s.bbox = box;
  s.opacity = g.opacity();
  s.color = g.clamped_color();

  result.outcome = ProjectionOutcome::kVisible;
  result.splat = s;
  return result;
}

}  // namespace sgslam
