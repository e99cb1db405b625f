// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sgslam/renderer/renderer.hpp"
#include "sgslam/slam/dataset.hpp"

#include <cstdint>
#include <string>

namespace sgslam {

enum class Motion { kOrbit, kLine };

Motion parse_motion(const std::string& s);
std::string to_string(Motion m);

struct SynthConfig {
  std::uint64_t seed = 0;
  int gaussians = 100;
  int frames = 16;
  Motion motion = Motion::kOrbit;
  int width = 64;
  int height = 64;
  double focal = 60.0;
  double distance = 2.8;     // orbit radius, or distance of the line from the box center
  double step_deg = 0.5;     // orbit angle per frame
  double step_m = 0.03;      // line translation per frame
  RenderConfig render;

  void validate() const;
};

struct SyntheticScene {
  Scene scene;
  Dataset dataset;  // frames are dense renders of scene at dataset.ground_truth
};

/// Gaussians uniform in [-1, 1]^3, per-axis scales in [0.08, 0.2] m,
/// opacity in [0.6, 0.95] and uniform colors; cameras look at the origin.
SyntheticScene synth_scene(const SynthConfig& cfg);

/// World-to-camera pose at `center` looking at `target`, image y along world +y.
CameraPose look_at(const Vec3& center, const Vec3& target, const CameraPose& camera);

}  // namespace sgslam
