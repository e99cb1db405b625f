// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sgslam/renderer/image.hpp"
#include "sgslam/slam/dataset.hpp"

#include <limits>

namespace sgslam {

/// Returned by compute_psnr for identical images.
inline constexpr double kPsnrInfinity = std::numeric_limits<double>::infinity();

/// RMSE of camera-center residuals after the best rigid alignment of the
/// estimate onto the ground truth, in centimeters.
double compute_ate(const Trajectory& estimated, const Trajectory& ground_truth);

/// 10 log10(1 / MSE) over all RGB channels of [0,1] images.
double compute_psnr(const ImageRGB& rendered, const ImageRGB& reference);

/// Per-frame pose error of the estimate against the truth, without alignment.
struct PoseError {
  double translation_m = 0.0;
  double rotation_deg = 0.0;
};
PoseError pose_error(const CameraPose& estimated, const CameraPose& truth);

}  // namespace sgslam
