// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/slam/slam.hpp"

#include "sgslam/core/random.hpp"
#include "sgslam/sampler/sampler.hpp"
#include "sgslam/slam/metrics.hpp"
#include "sgslam/slam/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sgslam {

void SlamConfig::validate() const {
  if (tracking_tile < 1 || mapping_tile < 1) throw std::invalid_argument("tile sizes must be >= 1");
  if (mapping_every < 1) throw std::invalid_argument("mapping_every must be >= 1");
  if (tracking_iters < 1 || mapping_iters < 1)
    throw std::invalid_argument("iteration counts must be >= 1");
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  if (divergence_patience < 1) throw std::invalid_argument("divergence patience must be >= 1");
  if (!(tracking_lr_end > 0.0) || tracking_lr_end > 1.0) throw std::invalid_argument("tracking lr end must be in (0, 1]");
  if (!(densify_footprint > 0.0)) throw std::invalid_argument("densify footprint must be positive");
  render.validate();
}

TrackingDivergence::TrackingDivergence(int frame, int iteration)
    : std::runtime_error("tracking diverged at frame " + std::to_string(frame) + ", iteration " +
                         std::to_string(iteration)),
      frame_(frame),
      iteration_(iteration) {}

CameraPose predict_constant_velocity(const CameraPose& prev, const CameraPose& prev2) {
  return (prev * prev2.inverse()) * prev;
}

namespace {

BackwardConfig backward_config(const SlamConfig& cfg) {
  BackwardConfig b;
  b.lambda_depth = cfg.lambda_depth;
  b.mode = cfg.aggregation;
  b.threads = cfg.threads;
  b.background = cfg.render.background;
  return b;
}

RenderConfig render_config(const SlamConfig& cfg) {
  RenderConfig r = cfg.render;
  r.threads = cfg.threads;
  return r;
}

}  // namespace

TrackResult track_frame(const Scene& scene, const Frame& frame, const CameraPose& init,
                        const SlamConfig& cfg) {
  cfg.validate();
  TrackResult out;
  out.pose = init;
  const RenderConfig rcfg = render_config(cfg);
  const BackwardConfig bcfg = backward_config(cfg);
  const CounterRng seeds(cfg.seed, RngPurpose::kTrackingSampler);
  Adam rot(3, cfg.lr.pose_rotation);
  Adam trans(3, cfg.lr.pose_translation);

  // Rotation steps turn the camera about a point on the optical axis at the
  // frame's mean depth, so image shift and parallax land on separate coordinates.
  Vec3 pivot = Vec3::Zero();
  if (cfg.tracking_pivot) {
    double sum = 0.0;
    std::size_t valid = 0;
    for (double d : frame.depth.values)
      if (d > 0.0 && std::isfinite(d)) sum += d, ++valid;
    if (valid > 0) pivot.z() = sum / static_cast<double>(valid);
  }

  double prev = std::numeric_limits<double>::infinity();
  int rising = 0;
  const double decay =
      cfg.tracking_iters > 1 ? std::pow(cfg.tracking_lr_end, 1.0 / (cfg.tracking_iters - 1)) : 1.0;
  for (int it = 0; it < cfg.tracking_iters; ++it) {
    const double scale = std::pow(decay, it);
    rot.set_learning_rate(cfg.lr.pose_rotation * scale);
    trans.set_learning_rate(cfg.lr.pose_translation * scale);
    const SampledPixelSet samples =
        sample_tracking(init.width, init.height, cfg.tracking_tile,
                        seeds.bits(static_cast<std::uint64_t>(frame.index), static_cast<std::uint64_t>(it)));
    const SparseRender render = render_sparse(scene, out.pose, samples, rcfg);
    const FrameBackward bw = backward_frame(scene, out.pose, render, frame.color, &frame.depth, bcfg);
    out.losses.push_back(bw.loss);
    if (!std::isfinite(bw.loss)) throw TrackingDivergence(frame.index, it);
    rising = bw.loss > prev ? rising + 1 : 0;
    if (rising >= cfg.divergence_patience) throw TrackingDivergence(frame.index, it);
    prev = bw.loss;

    const Vec3 g_t = bw.world.pose.translation;
    const Vec3 g_w = bw.world.pose.rotation - pivot.cross(g_t);
    Vec3 dw, dt;
    rot.step(std::span<const double>(g_w.data(), 3), std::span<double>(dw.data(), 3));
    trans.step(std::span<const double>(g_t.data(), 3), std::span<double>(dt.data(), 3));
    const Quat dq = so3_exp(dw);
    out.pose.rotation = (dq * out.pose.rotation).normalized();
    out.pose.translation = dq * (out.pose.translation - pivot) + pivot + dt;
    ++out.iterations;
  }
  return out;
}

DensifyResult densify(Scene& scene, const Frame& frame, std::span<const PixelCoord> unseen,
                      const CameraPose& pose, const SlamConfig& cfg) {
  DensifyResult out;
  const int tile = cfg.mapping_tile;
  const int tiles_x = (frame.color.width + tile - 1) / tile;
  std::vector<char> taken(static_cast<std::size_t>(tiles_x) * ((frame.color.height + tile - 1) / tile), 0);
  const CameraPose to_world = pose.inverse();
  const Intrinsics& in = pose.intrinsics;
  for (const PixelCoord& p : unseen) {
    char& t = taken[static_cast<std::size_t>(p.y / tile) * tiles_x + p.x / tile];
    if (t) continue;
    const double d = frame.depth.at(p);
    if (!(d > 0.0) || !std::isfinite(d)) {
      ++out.skipped_invalid_depth;
      continue;
    }
    t = 1;
    const Vec3 p_cam((p.x + 0.5 - in.cx) * d / in.fx, (p.y + 0.5 - in.cy) * d / in.fy, d);
    Gaussian3D g;
    g.mean_world = to_world.to_camera(p_cam);
    g.log_scale = Vec3::Constant(std::log(cfg.densify_footprint * tile * d / in.fx));
    g.opacity_logit = 0.0;
    g.color = frame.color.at(p).cwiseMax(0.0).cwiseMin(1.0);
    scene.append(g);
    ++out.added;
  }
  return out;
}

MapResult map_update(Scene& scene, std::span<const Keyframe> window, const SlamConfig& cfg,
                     std::uint64_t call) {
  cfg.validate();
  if (window.empty()) throw std::invalid_argument("map_update needs at least one keyframe");
  MapResult out;
  const RenderConfig rcfg = render_config(cfg);
  const BackwardConfig bcfg = backward_config(cfg);

  // One dense forward pass per window frame gives the transmittance the mapping sampler needs.
  std::vector<TransmittanceMap> coverage;
  for (const Keyframe& kf : window)
    coverage.push_back(
        TransmittanceMap::from_grid(render_dense_reference(scene, kf.pose, rcfg).transmittance));
  const std::vector<PixelCoord> unseen = classify_unseen(coverage.back());
  out.unseen_before = unseen.size();
  out.densify = densify(scene, *window.back().frame, unseen, window.back().pose, cfg);
  if (scene.empty()) return out;

  const std::size_t n = scene.size();
  Adam means(3 * n, cfg.lr.means), scales(3 * n, cfg.lr.log_scale), rots(3 * n, cfg.lr.rotation);
  Adam opac(n, cfg.lr.opacity), colors(3 * n, cfg.lr.colors);
  std::vector<double> g_mean(3 * n), g_scale(3 * n), g_rot(3 * n), g_opac(n), g_color(3 * n);
  std::vector<double> d_mean(3 * n), d_scale(3 * n), d_rot(3 * n), d_opac(n), d_color(3 * n);
  const CounterRng seeds(cfg.seed, RngPurpose::kMappingSampler);
  const double inv_frames = 1.0 / static_cast<double>(window.size());

  for (int it = 0; it < cfg.mapping_iters; ++it) {
    std::fill(g_mean.begin(), g_mean.end(), 0.0);
    std::fill(g_scale.begin(), g_scale.end(), 0.0);
    std::fill(g_rot.begin(), g_rot.end(), 0.0);
    std::fill(g_opac.begin(), g_opac.end(), 0.0);
    std::fill(g_color.begin(), g_color.end(), 0.0);
    double loss = 0.0;
    for (std::size_t f = 0; f < window.size(); ++f) {
      const Keyframe& kf = window[f];
      const SampledPixelSet samples = sample_mapping(
          kf.frame->color, coverage[f], cfg.mapping_tile, seeds.bits(call, static_cast<std::uint64_t>(it), f));
      const SparseRender render = render_sparse(scene, kf.pose, samples, rcfg);
      const FrameBackward bw =
          backward_frame(scene, kf.pose, render, kf.frame->color, &kf.frame->depth, bcfg);
      loss += bw.loss * inv_frames;
      for (std::size_t i = 0; i < n; ++i) {
        const GaussianGradient& g = bw.world.gaussians[i];
        for (int k = 0; k < 3; ++k) {
          g_mean[3 * i + k] += g.mean[k] * inv_frames;
          g_scale[3 * i + k] += g.log_scale[k] * inv_frames;
          g_rot[3 * i + k] += g.rotation[k] * inv_frames;
          g_color[3 * i + k] += g.color[k] * inv_frames;
        }
        g_opac[i] += g.opacity_logit * inv_frames;
      }
    }
    out.losses.push_back(loss);

    means.step(g_mean, d_mean);
    scales.step(g_scale, d_scale);
    rots.step(g_rot, d_rot);
    opac.step(g_opac, d_opac);
    colors.step(g_color, d_color);
    for (std::size_t i = 0; i < n; ++i) {
      Gaussian3D& g = scene[i];
      const Vec3 dr(d_rot[3 * i], d_rot[3 * i + 1], d_rot[3 * i + 2]);
      for (int k = 0; k < 3; ++k) {
        g.mean_world[k] += d_mean[3 * i + k];
        g.log_scale[k] += d_scale[3 * i + k];
        g.color[k] = std::clamp(g.color[k] + d_color[3 * i + k], 0.0, 1.0);
      }
      if (dr.squaredNorm() > 0.0) {
        g.rotation = g.rotation * so3_exp(dr);
        keep_unit(g.rotation);
      }
      g.opacity_logit += d_opac[i];
    }
    ++out.iterations;
  }
  return out;
}

std::string SlamEvent::str() const {
  return (kind == Kind::kTrack ? "track " : "map ") + std::to_string(frame);
}

SlamResult run_slam(const Dataset& ds, const SlamConfig& cfg) {
  cfg.validate();
  if (ds.frames.empty()) throw std::invalid_argument("dataset has no frames");
  SlamResult out;
  std::vector<CameraPose> poses;
  std::vector<std::size_t> keyframe_pos;

  for (std::size_t t = 0; t < ds.frames.size(); ++t) {
    const Frame& frame = ds.frames[t];
    CameraPose pose = ds.camera();
    if (t > 0) {
      const CameraPose init = t >= 2 ? predict_constant_velocity(poses[t - 1], poses[t - 2]) : poses[t - 1];
      const TrackResult tr = track_frame(out.scene, frame, init, cfg);
      out.tracking_iterations += static_cast<std::size_t>(tr.iterations);
      pose = tr.pose;
    }
    poses.push_back(pose);
    out.trajectory.push_back(frame.index, pose);
    out.events.push_back({SlamEvent::Kind::kTrack, frame.index});

    if (t % static_cast<std::size_t>(cfg.mapping_every) == 0) {
      keyframe_pos.push_back(t);
      out.keyframes.push_back(frame.index);
      std::vector<Keyframe> window;
      const std::size_t first =
          keyframe_pos.size() > static_cast<std::size_t>(cfg.window) ? keyframe_pos.size() - cfg.window : 0;
      for (std::size_t k = first; k < keyframe_pos.size(); ++k)
        window.push_back({&ds.frames[keyframe_pos[k]], poses[keyframe_pos[k]]});
      const MapResult mr = map_update(out.scene, window, cfg, out.map_updates);
      out.mapping_iterations += static_cast<std::size_t>(mr.iterations);
      ++out.map_updates;
      out.events.push_back({SlamEvent::Kind::kMap, frame.index});
    }
  }

  const RenderConfig rcfg = render_config(cfg);
  for (std::size_t pos : keyframe_pos) {
    const DenseRender r = render_dense_reference(out.scene, poses[pos], rcfg);
    out.keyframe_psnr.push_back(compute_psnr(r.image, ds.frames[pos].color));
  }
  return out;
}

}  // namespace sgslam
