// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sgslam/core/types.hpp"
#include "sgslam/pipemodel/workload.hpp"
#include "sgslam/renderer/image.hpp"
#include "sgslam/renderer/renderer.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace sgslam {

struct PixelLoss {
  double loss = 0.0;
  Vec3 dL_dcolor = Vec3::Zero();
  double dL_ddepth = 0.0;
};

/// Mean-over-channels L1 on color plus lambda_depth * |depth - ref_depth|.
/// The depth term is skipped when ref_depth is absent or not positive.
/// The subgradient of |x| is 0 for |x| <= 1e-12.
PixelLoss pixel_loss(const PixelRenderRecord& rendered, const Vec3& ref_color,
                     std::optional<double> ref_depth, double lambda_depth);

/// Screen-space partials of one pixel-Gaussian pair.
struct ContributorGradient {
  std::size_t splat = 0;
  std::int64_t gaussian_id = 0;
  double dL_dalpha = 0.0;
  double dL_dopacity_logit = 0.0;
  Vec3 dL_dcolor = Vec3::Zero();
  Vec2 dL_dmean_px = Vec2::Zero();
  Vec3 dL_dconic = Vec3::Zero();  // (a, b, c) of conic [[a, b], [b, c]]
  double dL_ddepth = 0.0;         // w.r.t. the splat's camera-frame z
};

struct PixelGradient {
  PixelCoord pixel;
  Vec3 dL_dC = Vec3::Zero();
  double dL_dD = 0.0;
  std::vector<ContributorGradient> partials;  // forward contributor order
  std::size_t saturated = 0;  // contributors on the clamped, zero-gradient path
};

/// Reverse rasterization of one pixel from its cached forward record.
/// Alpha partials are chained to mean_px, conic and opacity through the splats
/// the record's contributors index into.
PixelGradient reverse_rasterize(const PixelRenderRecord& record, std::span<const Splat2D> splats,
                                const Vec3& dL_dC, double dL_dD = 0.0,
                                const Vec3& background = Vec3::Zero());

/// Number of floats in one per-Gaussian screen-space gradient record.
inline constexpr int kSplatGradientFloats = 11;

/// Per-Gaussian sum of ContributorGradient fields.
struct SplatGradient {
  double dL_dalpha = 0.0;
  double dL_dopacity_logit = 0.0;
  Vec3 dL_dcolor = Vec3::Zero();
  Vec2 dL_dmean_px = Vec2::Zero();
  Vec3 dL_dconic = Vec3::Zero();
  double dL_ddepth = 0.0;

  /// Flat layout: alpha, opacity_logit, color[3], mean_px[2], conic[3], depth.
  std::array<double, kSplatGradientFloats> flatten() const;
  static SplatGradient from_flat(const std::array<double, kSplatGradientFloats>& v);
  static std::array<double, kSplatGradientFloats> flatten(const ContributorGradient& c);
};

struct ScreenGradientBuffer {
  std::vector<SplatGradient> gaussians;  // indexed by Gaussian id
  std::vector<std::uint32_t> touches;    // number of partials summed per Gaussian
};

enum class AggregationMode { kDeterministic, kConcurrent };

/// Sums partials per Gaussian. Deterministic mode visits them in
/// (gaussian id, row-major pixel) order; concurrent mode uses atomic adds
/// from `threads` workers in whatever order they arrive.
ScreenGradientBuffer aggregate(std::span<const PixelGradient> partials, std::size_t scene_size,
                               AggregationMode mode = AggregationMode::kDeterministic,
                               int threads = 1, WorkloadTrace* trace = nullptr);

struct GaussianGradient {
  Vec3 mean = Vec3::Zero();
  Vec3 log_scale = Vec3::Zero();
  Vec3 rotation = Vec3::Zero();  // right tangent: R' = R * Exp(phi)
  double opacity_logit = 0.0;
  Vec3 color = Vec3::Zero();
};

/// Left tangent of the world-to-camera pose: R' = Exp(w) R, t' = Exp(w) t + dt.
struct PoseGradient {
  Vec3 rotation = Vec3::Zero();
  Vec3 translation = Vec3::Zero();
};

struct GradientBuffer {
  std::vector<GaussianGradient> gaussians;
  PoseGradient pose;
};

/// Chains screen-space sums through the projection into world-space
/// Gaussian gradients and the camera pose gradient.
GradientBuffer reproject(const ScreenGradientBuffer& screen, const CameraPose& cam,
                         const Scene& scene);

struct BackwardConfig {
  double lambda_depth = 0.1;
  AggregationMode mode = AggregationMode::kDeterministic;
  int threads = 1;
  Vec3 background = Vec3::Zero();  // must match the forward RenderConfig
};

/// Full backward pass over a sparse render. The frame loss is the mean
/// pixel loss over every rendered pixel.
struct FrameBackward {
  double loss = 0.0;
  std::vector<PixelGradient> pixels;
  ScreenGradientBuffer screen;
  GradientBuffer world;
  std::size_t saturated = 0;
  WorkloadTrace trace;
};

FrameBackward backward_frame(const Scene& scene, const CameraPose& cam, const SparseRender& render,
                             const ImageRGB& ref_color, const ScalarGrid* ref_depth,
                             const BackwardConfig& cfg);

/// Loss only; same definition as FrameBackward::loss.
double frame_loss(const SparseRender& render, const ImageRGB& ref_color,
                  const ScalarGrid* ref_depth, double lambda_depth);

/// Debug dump: `gauss_id param_name value...` per parameter, then `pose rotation|translation ...`.
void write_gradient_dump(std::ostream& os, const GradientBuffer& g);

}  // namespace sgslam
