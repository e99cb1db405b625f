// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/sampler/sampler.hpp"

#include "sgslam/core/random.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace sgslam {
namespace {

SampledPixelSet empty_grid(int width, int height, int tile_size) {
  if (tile_size < 1) throw std::invalid_argument("tile size must be >= 1");
  if (width < 1 || height < 1) throw std::invalid_argument("frame must be at least 1x1");
  SampledPixelSet s;
  s.width = width;
  s.height = height;
  s.tile_size = tile_size;
  s.tiles_x = (width + tile_size - 1) / tile_size;
  s.tiles_y = (height + tile_size - 1) / tile_size;
  s.pixels.reserve(s.tile_count());
  return s;
}

}  // namespace

SampledPixelSet SampledPixelSet::dense(int width, int height) {
  SampledPixelSet s = empty_grid(width, height, 1);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) s.pixels.push_back({x, y});
  return s;
}

TransmittanceMap TransmittanceMap::from_grid(const ScalarGrid& grid) {
  TransmittanceMap t;
  t.width = grid.width;
  t.height = grid.height;
  t.values = grid.values;
  return t;
}

SampledPixelSet sample_tracking(int width, int height, int tile_size, std::uint64_t seed) {
  SampledPixelSet s = empty_grid(width, height, tile_size);
  const CounterRng rng(seed, RngPurpose::kTrackingSampler);
  for (int ty = 0; ty < s.tiles_y; ++ty) {
    for (int tx = 0; tx < s.tiles_x; ++tx) {
      const int x0 = tx * tile_size;
      const int y0 = ty * tile_size;
      const int tw = std::min(tile_size, width - x0);
      const int th = std::min(tile_size, height - y0);
      const auto k = static_cast<int>(rng.below(static_cast<std::uint64_t>(tw) * th,
                                                static_cast<std::uint64_t>(tx),
                                                static_cast<std::uint64_t>(ty)));
      s.pixels.push_back({x0 + k % tw, y0 + k / tw});
    }
  }
  return s;
}

std::vector<PixelCoord> classify_unseen(const TransmittanceMap& t) {
  std::vector<PixelCoord> out;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t.values[i] > kUnseenTransmittance) out.push_back(t.coord(i));
  if (!t.coords.empty()) std::sort(out.begin(), out.end(), row_major_less);
  return out;
}

double luminance(const Vec3& rgb) { return 0.299 * rgb.x() + 0.587 * rgb.y() + 0.114 * rgb.z(); }

ScalarGrid luminance_grid(const ImageRGB& image) {
  ScalarGrid g(image.width, image.height);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) g.values[i] = luminance(image.pixels[i]);
  return g;
}

double sobel_weight(const ScalarGrid& luma, PixelCoord p) {
  auto at = [&](int x, int y) {
    x = std::clamp(x, 0, luma.width - 1);
    y = std::clamp(y, 0, luma.height - 1);
    return luma.at(x, y);
  };
  const int x = p.x;
  const int y = p.y;
  const double gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1)) -
                    (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
  const double gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1)) -
                    (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
  return std::sqrt(gx * gx + gy * gy);
}

double sobel_weight(const ImageRGB& image, PixelCoord p) {
  // Only the 3x3 neighborhood matters; converting it alone keeps this O(1).
  ScalarGrid patch(3, 3);
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const int x = std::clamp(p.x + dx, 0, image.width - 1);
      const int y = std::clamp(p.y + dy, 0, image.height - 1);
      patch.at(dx + 1, dy + 1) = luminance(image.at(x, y));
    }
  return sobel_weight(patch, {1, 1});
}

ScalarGrid sobel_magnitude(const ImageRGB& image) {
  const ScalarGrid luma = luminance_grid(image);
  ScalarGrid out(image.width, image.height);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) out.at(x, y) = sobel_weight(luma, {x, y});
  return out;
}

double mapping_draw(std::uint64_t seed, PixelCoord p) {
  const CounterRng rng(seed, RngPurpose::kMappingSampler);
  return rng.uniform(static_cast<std::uint64_t>(p.x), static_cast<std::uint64_t>(p.y));
}

std::vector<PixelCoord> select_weighted(const ScalarGrid& weights, int tile_size,
                                        std::uint64_t seed) {
  const SampledPixelSet grid = empty_grid(weights.width, weights.height, tile_size);
  std::vector<PixelCoord> out;
  out.reserve(grid.tile_count());
  for (int ty = 0; ty < grid.tiles_y; ++ty) {
    for (int tx = 0; tx < grid.tiles_x; ++tx) {
      const int x0 = tx * tile_size;
      const int y0 = ty * tile_size;
      const int x1 = std::min(weights.width, x0 + tile_size);
      const int y1 = std::min(weights.height, y0 + tile_size);
      PixelCoord best{x0, y0};
      double best_score = -1.0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          const double score = weights.at(x, y) * mapping_draw(seed, {x, y});
          if (score > best_score) {
            best_score = score;
            best = {x, y};
          }
        }
      }
      out.push_back(best);
    }
  }
  return out;
}

SampledPixelSet sample_mapping(const ImageRGB& image, const TransmittanceMap& t, int tile_size,
                               std::uint64_t seed) {
  SampledPixelSet s = empty_grid(image.width, image.height, tile_size);
  if (t.coords.empty() && (t.width != image.width || t.height != image.height))
    throw std::invalid_argument("sample_mapping: transmittance map does not cover the frame");
  s.unseen_pixels = classify_unseen(t);
  s.pixels = select_weighted(sobel_magnitude(image), tile_size, seed);
  return s;
}

void write_sample_dump(std::ostream& os, const SampledPixelSet& samples) {
  for (const auto& p : samples.pixels) os << p.x << ' ' << p.y << '\n';
  for (const auto& p : samples.unseen_pixels) os << p.x << ' ' << p.y << " unseen\n";
}

}  // namespace sgslam
