// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sgslam/core/gaussian_ops.hpp"
#include "sgslam/core/types.hpp"
#include "sgslam/pipemodel/workload.hpp"
#include "sgslam/renderer/image.hpp"
#include "sgslam/sampler/sampler.hpp"

#include <span>
#include <vector>

namespace sgslam {

struct RenderConfig {
  double alpha_threshold = 1.0 / 255.0;  // alpha*
  double transmittance_floor = 1e-4;     // early stop; 0 disables it
  bool use_lut_exp = false;
  double sigma_extent = kDefaultSigmaExtent;
  double near_plane = kDefaultNearPlane;
  Vec3 background = Vec3::Zero();
  int gaussian_lanes = 4;  // workers co-rendering one pixel
  int threads = 1;

  void validate() const;
};

/// Tile edge of the dense reference pipeline.
inline constexpr int kDenseTileSize = 16;

struct ProjectionCounts {
  std::size_t visible = 0;
  std::size_t behind_near_plane = 0;
  std::size_t outside_image = 0;
  std::size_t degenerate = 0;
};

struct ProjectedScene {
  std::vector<Splat2D> splats;
  ProjectionCounts counts;
};

ProjectedScene project_scene(const Scene& scene, const CameraPose& cam, const RenderConfig& cfg);

/// alpha_at, or its lookup-table variant when cfg.use_lut_exp is set.
double evaluate_alpha(const Splat2D& s, PixelCoord p, const RenderConfig& cfg);

/// A splat that passed alpha-checking at one pixel.
struct Contributor {
  std::size_t splat = 0;  // index into the projected splat list
  std::int64_t gaussian_id = 0;
  double alpha = 0.0;
  double depth = 0.0;
  Vec3 color = Vec3::Zero();
};

/// Per rendered pixel: the splats whose bbox holds the pixel and whose alpha exceeds alpha*.
/// Rows follow SampledPixelSet order: per-tile pixels, then unseen pixels not already listed.
struct IntersectionTable {
  std::vector<PixelCoord> pixels;
  std::vector<std::vector<Contributor>> entries;
};

/// Pixel-level projection with preemptive alpha-checking. Each splat's bbox
/// corners give the tile range of candidate pixels in the per-tile list; the
/// unseen pixels are scanned through their own row index.
IntersectionTable intersect_pixels(std::span<const Splat2D> splats, const SampledPixelSet& samples,
                                   const RenderConfig& cfg, WorkloadTrace* trace = nullptr);

/// Stable depth sort per pixel; equal depths keep Gaussian-id order.
IntersectionTable sort_contributors(IntersectionTable table, WorkloadTrace* trace = nullptr);
void sort_by_depth(std::vector<Contributor>& list);

/// Forward result for one pixel, including the cache consumed by the backward pass.
struct PixelRenderRecord {
  PixelCoord pixel;
  std::vector<Contributor> contributors;  // integrated contributors, depth order
  std::vector<double> transmittance;      // Gamma_i before contributor i
  std::vector<Vec3> prefix_color;         // C_i = sum_{j<=i} Gamma_j alpha_j c_j
  std::vector<double> prefix_depth;       // sum_{j<=i} Gamma_j alpha_j d_j
  Vec3 color = Vec3::Zero();              // includes background * final_transmittance
  double final_transmittance = 1.0;
  double depth = 0.0;  // alpha-weighted mean depth; 0 with no contributors
};

/// Front-to-back compositing of depth-sorted contributors. Partial colors are
/// formed on cfg.gaussian_lanes independent lanes and merged in depth order.
PixelRenderRecord rasterize_pixel(PixelCoord pixel, std::span<const Contributor> sorted,
                                  const RenderConfig& cfg);

struct SparseRender {
  std::vector<PixelRenderRecord> records;  // IntersectionTable row order
  std::vector<Splat2D> splats;
  ProjectionCounts projection;
  WorkloadTrace trace;
};

/// Pixel-based forward pass: project, intersect, sort, rasterize.
SparseRender render_sparse(const Scene& scene, const CameraPose& cam,
                           const SampledPixelSet& samples, const RenderConfig& cfg);

struct DenseRender {
  ImageRGB image;
  ScalarGrid transmittance;
  ScalarGrid depth;
  /// Per pixel (row-major) Gaussian ids in compositing order; filled on request.
  std::vector<std::vector<std::int64_t>> contributor_ids;
  ProjectionCounts projection;
  WorkloadTrace trace;
};

/// Classic tile-based forward pass over every pixel (16x16 tiles, per-tile
/// depth sort, alpha-checking inside rasterization).
DenseRender render_dense_reference(const Scene& scene, const CameraPose& cam,
                                   const RenderConfig& cfg, bool keep_contributors = false);

}  // namespace sgslam
