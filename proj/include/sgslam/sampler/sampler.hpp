// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sgslam/core/types.hpp"
#include "sgslam/renderer/image.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace sgslam {

/// Sparse pixel selection for one frame: exactly one pixel per tile, in
/// row-major tile order, plus a separately stored list of unseen pixels.
struct SampledPixelSet {
  int width = 0;
  int height = 0;
  int tile_size = 1;
  int tiles_x = 0;
  int tiles_y = 0;
  std::vector<PixelCoord> pixels;         // pixels[ty * tiles_x + tx] lies in tile (tx, ty)
  std::vector<PixelCoord> unseen_pixels;  // row-major

  std::size_t tile_count() const { return static_cast<std::size_t>(tiles_x) * tiles_y; }

  /// Every pixel of a w x h frame, i.e. the w_t = 1 configuration.
  static SampledPixelSet dense(int width, int height);
};

/// Final transmittance per pixel, either for the whole frame (coords empty)
/// or for the listed coordinates.
struct TransmittanceMap {
  int width = 0;
  int height = 0;
  std::vector<double> values;
  std::vector<PixelCoord> coords;

  static TransmittanceMap from_grid(const ScalarGrid& grid);
  std::size_t size() const { return values.size(); }
  PixelCoord coord(std::size_t i) const {
    return coords.empty() ? PixelCoord{static_cast<int>(i % width), static_cast<int>(i / width)}
                          : coords[i];
  }
};

/// Strictly greater than this transmittance means the pixel is unexplained by the map.
inline constexpr double kUnseenTransmittance = 0.5;

/// One uniformly random pixel per w_t x w_t tile; edge tiles sample their clipped extent.
SampledPixelSet sample_tracking(int width, int height, int tile_size, std::uint64_t seed);

/// Pixels with final transmittance > 0.5, in row-major order.
std::vector<PixelCoord> classify_unseen(const TransmittanceMap& t);

double luminance(const Vec3& rgb);
ScalarGrid luminance_grid(const ImageRGB& image);

/// Sobel gradient magnitude sqrt(Gx^2 + Gy^2) on luminance, replicate-padded borders.
double sobel_weight(const ScalarGrid& luma, PixelCoord p);
double sobel_weight(const ImageRGB& image, PixelCoord p);
ScalarGrid sobel_magnitude(const ImageRGB& image);

/// Per-pixel uniform draw r in (0, 1) used by the mapping sampler.
double mapping_draw(std::uint64_t seed, PixelCoord p);

/// Per-tile winner of the score w_R(p) * r(p); ties go to the row-major first pixel.
std::vector<PixelCoord> select_weighted(const ScalarGrid& weights, int tile_size,
                                        std::uint64_t seed);

/// Mapping sampler: unseen pixels from t, plus one texture-weighted pixel per w_m tile.
SampledPixelSet sample_mapping(const ImageRGB& image, const TransmittanceMap& t, int tile_size,
                               std::uint64_t seed);

/// Debug dump, one `x y [unseen]` line per pixel.
void write_sample_dump(std::ostream& os, const SampledPixelSet& samples);

}  // namespace sgslam
