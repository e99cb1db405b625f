// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sgslam/autodiff/gradients.hpp"
#include "sgslam/renderer/renderer.hpp"
#include "sgslam/slam/dataset.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgslam {

struct LearningRates {
  double pose_rotation = 8e-3;
  double pose_translation = 1e-2;
  double means = 1e-3;
  double colors = 2.5e-2;
  double opacity = 5e-2;
  double log_scale = 1e-3;
  double rotation = 1e-3;  // Gaussian orientation tangent
};

struct SlamConfig {
  int tracking_tile = 16;  // w_t
  int mapping_tile = 4;    // w_m
  int mapping_every = 4;
  int tracking_iters = 40;  // S_t
  int mapping_iters = 60;   // S_m
  int window = 5;           // keyframes refined per map_update
  double lambda_depth = 0.1;
  LearningRates lr;
  /// Pose learning rates decay geometrically to this fraction of their start
  /// by the last tracking iteration.
  double tracking_lr_end = 0.05;
  /// Rotate about the mean frame depth on the optical axis instead of the camera center.
  bool tracking_pivot = true;
  int divergence_patience = 10;  // consecutive loss increases
  /// New Gaussians get isotropic scale densify_footprint * w_m * depth / fx.
  double densify_footprint = 1.0;
  std::uint64_t seed = 0;
  RenderConfig render;
  AggregationMode aggregation = AggregationMode::kDeterministic;
  int threads = 1;

  void validate() const;
};

class TrackingDivergence : public std::runtime_error {
 public:
  TrackingDivergence(int frame, int iteration);
  int frame() const { return frame_; }
  int iteration() const { return iteration_; }

 private:
  int frame_;
  int iteration_;
};

/// (T_{t-1} T_{t-2}^-1) T_{t-1}.
CameraPose predict_constant_velocity(const CameraPose& prev, const CameraPose& prev2);

struct TrackResult {
  CameraPose pose;
  int iterations = 0;
  std::vector<double> losses;  // one per iteration, before its update
};

/// Pose-only optimization against a frozen scene. Every iteration draws a
/// fresh tracking sample keyed by (seed, frame.index, iteration).
TrackResult track_frame(const Scene& scene, const Frame& frame, const CameraPose& init,
                        const SlamConfig& cfg);

struct DensifyResult {
  std::size_t added = 0;
  std::size_t skipped_invalid_depth = 0;
};

/// Back-projects the first unseen pixel of every w_m tile and appends a Gaussian there.
DensifyResult densify(Scene& scene, const Frame& frame, std::span<const PixelCoord> unseen,
                      const CameraPose& pose, const SlamConfig& cfg);

struct Keyframe {
  const Frame* frame = nullptr;
  CameraPose pose;
};

struct MapResult {
  std::size_t unseen_before = 0;  // unseen pixels of the newest keyframe
  DensifyResult densify;
  int iterations = 0;
  std::vector<double> losses;
};

/// Densify from the newest keyframe, then S_m steps on Gaussian parameters
/// over texture-weighted samples of every window frame. `call` keys the RNG.
MapResult map_update(Scene& scene, std::span<const Keyframe> window, const SlamConfig& cfg,
                     std::uint64_t call = 0);

struct SlamEvent {
  enum class Kind { kTrack, kMap };
  Kind kind = Kind::kTrack;
  int frame = 0;

  std::string str() const;
};

struct SlamResult {
  Trajectory trajectory;
  Scene scene;
  std::vector<SlamEvent> events;
  std::vector<int> keyframes;
  std::vector<double> keyframe_psnr;  // final map rendered at the estimated keyframe poses
  std::size_t tracking_iterations = 0;
  std::size_t mapping_iterations = 0;
  std::size_t map_updates = 0;
};

/// Frame 0 gets the identity pose and bootstraps the map. Every later frame
/// is tracked; frames with position % mapping_every == 0 are then mapped.
SlamResult run_slam(const Dataset& ds, const SlamConfig& cfg);

}  // namespace sgslam
