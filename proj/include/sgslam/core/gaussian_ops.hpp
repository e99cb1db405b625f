// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sgslam/core/types.hpp"

#include <optional>

namespace sgslam {

/// Upper clamp applied to every per-pixel alpha.
inline constexpr double kAlphaMax = 0.99;
inline constexpr double kDefaultNearPlane = 0.01;
inline constexpr double kDefaultSigmaExtent = 3.0;
/// Projected covariances with a smaller determinant are dropped.
inline constexpr double kMinCovDeterminant = 1e-12;

/// R * diag(exp(log_scale))^2 * R^T.
Mat3 build_covariance(const Vec3& log_scale, const Quat& rotation);

/// Camera-frame quantities shared by projection and its adjoint.
struct CameraSpaceGaussian {
  Vec3 p_cam;        // mean in the camera frame
  Mat3 cov_cam;      // W * Sigma * W^T
  Mat23 jacobian;    // pinhole Jacobian at p_cam
  Mat2 cov2d;        // J * cov_cam * J^T
};

CameraSpaceGaussian to_camera_space(const Gaussian3D& g, const CameraPose& cam);

enum class ProjectionOutcome { kVisible, kBehindNearPlane, kOutsideImage, kDegenerate };

struct ProjectionResult {
  ProjectionOutcome outcome = ProjectionOutcome::kOutsideImage;
  std::optional<Splat2D> splat;

  explicit operator bool() const { return splat.has_value(); }
};

/// Projects g into cam. The bbox is the square of half-width
/// sigma_extent * sqrt(lambda_max(cov2d)) around the mean, as the set of
/// pixels whose centers fall inside it, clipped to the image.
ProjectionResult project_gaussian(const Gaussian3D& g, std::size_t scene_index,
                                  const CameraPose& cam, double near = kDefaultNearPlane,
                                  double sigma_extent = kDefaultSigmaExtent);

/// d = p + 0.5 - mean_px; returns d^T * conic * d.
inline double mahalanobis_sq(const Splat2D& s, PixelCoord p) {
  const Vec2 d(p.x + 0.5 - s.mean_px.x(), p.y + 0.5 - s.mean_px.y());
  return d.dot(s.conic * d);
}

/// opacity * exp(-q/2), clamped to kAlphaMax.
inline double alpha_at(const Splat2D& s, PixelCoord p) {
  const double a = s.opacity * std::exp(-0.5 * mahalanobis_sq(s, p));
  return a < kAlphaMax ? a : kAlphaMax;
}

}  // namespace sgslam
