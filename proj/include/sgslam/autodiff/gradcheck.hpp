// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sgslam/autodiff/gradients.hpp"
#include "sgslam/renderer/renderer.hpp"
#include "sgslam/sampler/sampler.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sgslam {

/// Central finite-difference check of the full forward/backward chain.
struct GradCheckConfig {
  int scenes = 10;
  int gaussians = 10;
  int width = 64;
  int height = 32;
  int tile_size = 16;  // 64x32 with 16-pixel tiles gives 8 sampled pixels
  double h = 1e-5;
  double tolerance = 1e-4;
  /// Denominator floor: |a - f| / max(|a|, |f|, floor). With floor 1e-4 and
  /// tolerance 1e-4 tiny gradients must agree to 1e-8 absolute.
  double floor = 1e-4;
  double lambda_depth = 0.1;
  std::uint64_t seed = 1;
};

struct GradCheckCase {
  Scene scene;
  CameraPose cam;
  SampledPixelSet samples;
  ImageRGB ref_color;
  ScalarGrid ref_depth;
  RenderConfig render;
};

/// Random scene of cfg.gaussians Gaussians placed along the rays of the
/// sampled pixels, with references offset away from every L1 kink.
GradCheckCase make_gradcheck_case(const GradCheckConfig& cfg, int index);

struct GradCheckEntry {
  int scene = 0;
  std::int64_t gaussian = -1;  // -1 for pose parameters
  std::string param;
  int component = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::size_t failures = 0;
  /// Parameters whose +-h perturbation changed some pixel's contributor list.
  std::size_t skipped_discontinuous = 0;

  bool passed() const { return checked > 0 && failures == 0; }
  void merge(const GradCheckReport& o);
};

double gradcheck_rel_error(double analytic, double numeric, double floor);

GradCheckReport check_case(const GradCheckCase& c, const GradCheckConfig& cfg, int scene_index);

GradCheckReport run_gradcheck(const GradCheckConfig& cfg);

}  // namespace sgslam
