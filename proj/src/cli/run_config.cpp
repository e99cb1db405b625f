// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/cli/run_config.hpp"

namespace sgslam {

RenderConfig to_render_config(const RunConfig& c) {
  RenderConfig r;
  r.alpha_threshold = c.alpha_threshold;
  r.transmittance_floor = c.transmittance_floor;
  r.use_lut_exp = c.lut_exp;
  r.sigma_extent = c.sigma_extent;
  r.near_plane = c.near_plane;
  r.gaussian_lanes = c.lanes;
  r.threads = c.threads;
  r.validate();
  return r;
}

SlamConfig to_slam_config(const RunConfig& c) {
  SlamConfig s;
  s.tracking_tile = c.wt;
  s.mapping_tile = c.wm;
  s.mapping_every = c.mapping_every;
  s.tracking_iters = c.st;
  s.mapping_iters = c.sm;
  s.window = c.window;
  s.lambda_depth = c.lambda_depth;
  s.lr.pose_rotation = c.lr_pose_rotation;
  s.lr.pose_translation = c.lr_pose_translation;
  s.tracking_lr_end = c.tracking_lr_end;
  s.lr.means = c.lr_means;
  s.lr.colors = c.lr_colors;
  s.lr.opacity = c.lr_opacity;
  s.lr.log_scale = c.lr_log_scale;
  s.lr.rotation = c.lr_rotation;
  s.divergence_patience = c.divergence_patience;
  s.densify_footprint = c.densify_footprint;
  s.seed = c.seed;
  s.render = to_render_config(c);
  s.threads = c.threads;
  s.aggregation = c.determinism || c.threads <= 1 ? AggregationMode::kDeterministic
                                                  : AggregationMode::kConcurrent;
  s.validate();
  return s;
}

AggUnitConfig to_agg_config(const RunConfig& c) {
  AggUnitConfig a;
  a.batch = c.batch;
  a.cache_entries = c.cache_entries;
  a.scoreboard_entries = c.scoreboard_entries;
  a.load_latency = c.load_latency;
  a.validate();
  return a;
}

SynthConfig to_synth_config(const RunConfig& c) {
  SynthConfig s;
  s.seed = c.seed;
  s.gaussians = c.gaussians;
  s.frames = c.frames;
  s.motion = parse_motion(c.motion);
  s.width = c.width;
  s.height = c.height;
  s.focal = c.focal;
  s.distance = c.distance;
  s.step_deg = c.step_deg;
  s.render = to_render_config(c);
  s.validate();
  return s;
}

}  // namespace sgslam
