// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sgslam/cli/synth.hpp"
#include "sgslam/pipemodel/aggregation_unit.hpp"
#include "sgslam/renderer/renderer.hpp"
#include "sgslam/slam/slam.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>

namespace sgslam {

inline constexpr const char* kVersion = "0.1.0";

/// Every user-facing knob. Defaults resolve without a config file; a JSON
/// config (flat keys named like the flags) overrides them and explicit flags
/// override the file.
struct RunConfig {
  // common
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string config;
  bool determinism = false;
  int threads = 1;

  // inputs
  std::string scene;
  std::string dataset;
  int frame = 0;
  std::string trace;

  // renderer
  double alpha_threshold = 1.0 / 255.0;
  double transmittance_floor = 1e-4;
  bool lut_exp = false;
  double sigma_extent = kDefaultSigmaExtent;
  double near_plane = kDefaultNearPlane;
  int lanes = 4;

  // slam
  int wt = 16;
  int wm = 4;
  int mapping_every = 4;
  int st = 40;
  int sm = 60;
  int window = 5;
  double lambda_depth = 0.1;
  double lr_pose_rotation = 8e-3;
  double lr_pose_translation = 1e-2;
  double tracking_lr_end = 0.05;
  double lr_means = 1e-3;
  double lr_colors = 2.5e-2;
  double lr_opacity = 5e-2;
  double lr_log_scale = 1e-3;
  double lr_rotation = 1e-3;
  double densify_footprint = 1.0;
  int divergence_patience = 10;
  int max_frames = -1;

  // aggregation unit
  int batch = 4;
  std::size_t cache_entries = kDefaultCacheBytes / kGradientRecordBytes;
  std::size_t scoreboard_entries = kDefaultScoreboardBytes / kGradientRecordBytes;
  int load_latency = 8;

  // synthetic data
  int gaussians = 100;
  int frames = 16;
  std::string motion = "orbit";
  int width = 64;
  int height = 64;
  double focal = 60.0;
  double distance = 2.8;
  double step_deg = 0.5;

  // gradcheck
  int scenes = 20;
};

RenderConfig to_render_config(const RunConfig& c);
SlamConfig to_slam_config(const RunConfig& c);
AggUnitConfig to_agg_config(const RunConfig& c);
SynthConfig to_synth_config(const RunConfig& c);

}  // namespace sgslam
