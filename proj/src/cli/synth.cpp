// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/cli/synth.hpp"

#include "sgslam/core/random.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sgslam {

Motion parse_motion(const std::string& s) {
  if (s == "orbit") return Motion::kOrbit;
  if (s == "line") return Motion::kLine;
  throw std::invalid_argument("unknown motion '" + s + "' (expected orbit or line)");
}

std::string to_string(Motion m) { return m == Motion::kOrbit ? "orbit" : "line"; }

void SynthConfig::validate() const {
  if (gaussians < 1) throw std::invalid_argument("need at least one Gaussian");
  if (frames < 1) throw std::invalid_argument("need at least one frame");
  if (width < 1 || height < 1) throw std::invalid_argument("image size must be positive");
  if (!(focal > 0.0) || !(distance > 1.0)) throw std::invalid_argument("invalid camera geometry");
  render.validate();
}

CameraPose look_at(const Vec3& center, const Vec3& target, const CameraPose& camera) {
  const Vec3 z = (target - center).normalized();
  Vec3 down(0.0, 1.0, 0.0);
  if (std::abs(z.dot(down)) > 0.999) down = Vec3(0.0, 0.0, 1.0);
  const Vec3 x = down.cross(z).normalized();
  const Vec3 y = z.cross(x);
  Mat3 r_c2w;
  r_c2w.col(0) = x;
  r_c2w.col(1) = y;
  r_c2w.col(2) = z;
  CameraPose pose = camera;
  pose.rotation = Quat(r_c2w.transpose()).normalized();
  pose.translation = -(pose.rotation * center);
  return pose;
}

SyntheticScene synth_scene(const SynthConfig& cfg) {
  cfg.validate();
  RngStream rng(cfg.seed, RngPurpose::kSceneSynthesis);
  SyntheticScene out;
  for (int i = 0; i < cfg.gaussians; ++i) {
    Gaussian3D g;
    g.mean_world = Vec3(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    for (int k = 0; k < 3; ++k) g.log_scale[k] = rng.uniform(std::log(0.08), std::log(0.2));
    const Vec3 axis(rng.normal(), rng.normal(), rng.normal());
    g.rotation = so3_exp(axis.normalized() * rng.uniform(0.0, std::numbers::pi));
    g.opacity_logit = logit(rng.uniform(0.6, 0.95));
    g.color = Vec3(rng.uniform(), rng.uniform(), rng.uniform());
    out.scene.append(g);
  }

  Dataset& ds = out.dataset;
  ds.width = cfg.width;
  ds.height = cfg.height;
  ds.intrinsics = {cfg.focal, cfg.focal, cfg.width / 2.0, cfg.height / 2.0};
  const CameraPose camera = ds.camera();
  const double step = cfg.step_deg * std::numbers::pi / 180.0;
  for (int t = 0; t < cfg.frames; ++t) {
    Vec3 center;
    Vec3 target = Vec3::Zero();
    if (cfg.motion == Motion::kOrbit) {
      const double theta = t * step;
      center = Vec3(cfg.distance * std::sin(theta), -0.3, -cfg.distance * std::cos(theta));
    } else {
      center = Vec3(-0.5 * cfg.step_m * (cfg.frames - 1) + t * cfg.step_m, -0.3, -cfg.distance);
      target = center + Vec3(0.0, 0.3, cfg.distance);
    }
    const CameraPose pose = look_at(center, target, camera);
    ds.ground_truth.push_back(t, pose);
    const DenseRender r = render_dense_reference(out.scene, pose, cfg.render);
    ds.frames.push_back({t, r.image, r.depth});
  }
  return out;
}

}  // namespace sgslam
