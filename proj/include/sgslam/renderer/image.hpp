// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sgslam/core/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sgslam {

/// Row-major RGB image with linear values nominally in [0, 1].
struct ImageRGB {
  int width = 0;
  int height = 0;
  std::vector<Vec3> pixels;

  ImageRGB() = default;
  ImageRGB(int w, int h, const Vec3& fill = Vec3::Zero())
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  Vec3& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Vec3& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Vec3& at(PixelCoord p) const { return at(p.x, p.y); }
};

/// Row-major single-channel grid.
struct ScalarGrid {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  ScalarGrid() = default;
  ScalarGrid(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(PixelCoord p) const { return at(p.x, p.y); }
};

/// Nearest 8-bit level of a [0,1] value (clamped).
std::uint8_t to_8bit(double v);

/// Binary PPM (P6, maxval 255).
void write_ppm(const std::string& path, const ImageRGB& image);
ImageRGB read_ppm(const std::string& path);

/// Raw float32 with a 3 x int32 header (width, height, channels), little-endian.
void write_f32_grid(const std::string& path, int width, int height, int channels,
                    const std::vector<double>& values);
void write_f32_grid(const std::string& path, const ScalarGrid& grid);

/// Dataset depth maps: int32 width, int32 height, then float32 meters, row-major.
void write_depth_f32(const std::string& path, const ScalarGrid& depth);
ScalarGrid read_depth_f32(const std::string& path);

}  // namespace sgslam
