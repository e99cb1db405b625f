// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/renderer/renderer.hpp"

#include "sgslam/core/parallel.hpp"
#include "sgslam/pipemodel/lut_exp.hpp"

#include <algorithm>
#include <stdexcept>

namespace sgslam {

void RenderConfig::validate() const {
  if (!(alpha_threshold > 0.0 && alpha_threshold < 1.0))
    throw std::invalid_argument("alpha threshold must lie in (0, 1)");
  if (transmittance_floor < 0.0 || transmittance_floor >= 1.0)
    throw std::invalid_argument("transmittance floor must lie in [0, 1)");
  if (!(sigma_extent > 0.0)) throw std::invalid_argument("sigma extent must be positive");
  if (!(near_plane > 0.0)) throw std::invalid_argument("near plane must be positive");
  if (gaussian_lanes < 1) throw std::invalid_argument("gaussian lanes must be >= 1");
}

ProjectedScene project_scene(const Scene& scene, const CameraPose& cam, const RenderConfig& cfg) {
  if (!cam.valid()) throw std::invalid_argument("invalid camera");
  ProjectedScene out;
  out.splats.reserve(scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    ProjectionResult r = project_gaussian(scene[i], i, cam, cfg.near_plane, cfg.sigma_extent);
    switch (r.outcome) {
      case ProjectionOutcome::kVisible:
        ++out.counts.visible;
        out.splats.push_back(*r.splat);
        break;
      case ProjectionOutcome::kBehindNearPlane: ++out.counts.behind_near_plane; break;
      case ProjectionOutcome::kOutsideImage: ++out.counts.outside_image; break;
      case ProjectionOutcome::kDegenerate: ++out.counts.degenerate; break;
    }
  }
  return out;
}

double evaluate_alpha(const Splat2D& s, PixelCoord p, const RenderConfig& cfg) {
  if (!cfg.use_lut_exp) return alpha_at(s, p);
  const double a = s.opacity * lut_exp(-0.5 * mahalanobis_sq(s, p));
  return std::min(a, kAlphaMax);
}

namespace {

Contributor make_contributor(const Splat2D& s, std::size_t index, double alpha) {
  return {index, s.source_id, alpha, s.depth, s.color};
}

bool depth_order(const Contributor& a, const Contributor& b) {
  return a.depth != b.depth ? a.depth < b.depth : a.gaussian_id < b.gaussian_id;
}

}  // namespace

IntersectionTable intersect_pixels(std::span<const Splat2D> splats, const SampledPixelSet& samples,
                                   const RenderConfig& cfg, WorkloadTrace* trace) {
  if (samples.pixels.size() != samples.tile_count())
    throw std::invalid_argument("sampled set must hold exactly one pixel per tile");

  IntersectionTable table;
  table.pixels = samples.pixels;

  // Unseen pixels get their own row index so they never disturb the tile arithmetic.
  std::vector<char> listed(static_cast<std::size_t>(samples.width) * samples.height, 0);
  for (const auto& p : samples.pixels) listed[static_cast<std::size_t>(p.y) * samples.width + p.x] = 1;
  std::vector<std::vector<std::pair<int, std::size_t>>> unseen_rows(samples.height);
  for (const auto& p : samples.unseen_pixels) {
    auto& flag = listed[static_cast<std::size_t>(p.y) * samples.width + p.x];
    if (flag) continue;
    flag = 1;
    unseen_rows[p.y].emplace_back(p.x, table.pixels.size());
    table.pixels.push_back(p);
  }
  for (auto& row : unseen_rows) std::sort(row.begin(), row.end());
  table.entries.resize(table.pixels.size());

  std::uint64_t checks = 0;
  std::uint64_t passing = 0;
  auto check = [&](const Splat2D& s, std::size_t splat_index, std::size_t row) {
    ++checks;
    const double a = evaluate_alpha(s, table.pixels[row], cfg);
    if (a > cfg.alpha_threshold) {
      table.entries[row].push_back(make_contributor(s, splat_index, a));
      ++passing;
    }
  };

  const int ts = samples.tile_size;
  for (std::size_t i = 0; i < splats.size(); ++i) {
    const Splat2D& s = splats[i];
    const PixelRect& b = s.bbox;
    const int tx0 = b.x0 / ts, tx1 = std::min(samples.tiles_x - 1, b.x1 / ts);
    const int ty0 = b.y0 / ts, ty1 = std::min(samples.tiles_y - 1, b.y1 / ts);
    for (int ty = ty0; ty <= ty1; ++ty) {
      for (int tx = tx0; tx <= tx1; ++tx) {
        const std::size_t row = static_cast<std::size_t>(ty) * samples.tiles_x + tx;
        const PixelCoord p = table.pixels[row];
        if (b.contains(p.x, p.y)) check(s, i, row);
      }
    }
    for (int y = std::max(0, b.y0); y <= std::min(samples.height - 1, b.y1); ++y) {
      const auto& row = unseen_rows[y];
      auto it = std::lower_bound(row.begin(), row.end(), std::make_pair(b.x0, std::size_t{0}));
      for (; it != row.end() && it->first <= b.x1; ++it) check(s, i, it->second);
    }
  }

  if (trace) {
    trace->alpha_checks += checks;
    trace->alpha_passing_pairs += passing;
    trace->preemptive_alpha_check = true;
  }
  return table;
}

void sort_by_depth(std::vector<Contributor>& list) {
  std::stable_sort(list.begin(), list.end(), depth_order);
}

IntersectionTable sort_contributors(IntersectionTable table, WorkloadTrace* trace) {
  std::uint64_t keys = 0;
  for (auto& list : table.entries) {
    sort_by_depth(list);
    keys += list.size();
  }
  if (trace) trace->sort_keys += keys;
  return table;
}

PixelRenderRecord rasterize_pixel(PixelCoord pixel, std::span<const Contributor> sorted,
                                  const RenderConfig& cfg) {
  PixelRenderRecord rec;
  rec.pixel = pixel;

  // Transmittance scan; it also fixes where early termination cuts the list.
  double t = 1.0;
  rec.transmittance.reserve(sorted.size());
  for (const Contributor& c : sorted) {
    rec.transmittance.push_back(t);
    t *= 1.0 - c.alpha;
    if (cfg.transmittance_floor > 0.0 && t < cfg.transmittance_floor) break;
  }
  const std::size_t n = rec.transmittance.size();
  rec.contributors.assign(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(n));
  rec.final_transmittance = t;
  rec.prefix_color.resize(n);
  rec.prefix_depth.resize(n);

  // Each lane owns a contiguous slice and forms local prefix sums of its
  // partial colors; lane totals are then folded in depth order.
  const std::size_t lanes = std::max<std::size_t>(1, std::min<std::size_t>(cfg.gaussian_lanes, n));
  const std::size_t chunk = n == 0 ? 0 : (n + lanes - 1) / lanes;
  std::vector<Vec3> lane_color(lanes, Vec3::Zero());
  std::vector<double> lane_depth(lanes, 0.0);
  for (std::size_t lane = 0; lane < lanes; ++lane) {
    const std::size_t begin = lane * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    Vec3 acc = Vec3::Zero();
    double dacc = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const Contributor& c = rec.contributors[i];
      const double w = rec.transmittance[i] * c.alpha;
      acc += w * c.color;
      dacc += w * c.depth;
      rec.prefix_color[i] = acc;
      rec.prefix_depth[i] = dacc;
    }
    lane_color[lane] = acc;
    lane_depth[lane] = dacc;
  }
  Vec3 offset = Vec3::Zero();
  double doffset = 0.0;
  for (std::size_t lane = 0; lane < lanes; ++lane) {
    const std::size_t begin = lane * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    for (std::size_t i = begin; i < end; ++i) {
      rec.prefix_color[i] += offset;
      rec.prefix_depth[i] += doffset;
    }
    offset += lane_color[lane];
    doffset += lane_depth[lane];
  }

  rec.color = offset + t * cfg.background;
  rec.depth = n > 0 ? doffset / (1.0 - t) : 0.0;
  return rec;
}

SparseRender render_sparse(const Scene& scene, const CameraPose& cam,
                           const SampledPixelSet& samples, const RenderConfig& cfg) {
  cfg.validate();
  if (samples.width != cam.width || samples.height != cam.height)
    throw std::invalid_argument("sampled set and camera disagree on frame size");

  SparseRender out;
  ProjectedScene projected = project_scene(scene, cam, cfg);
  out.projection = projected.counts;
  out.splats = std::move(projected.splats);
  out.trace.projected_gaussians = out.splats.size();

  IntersectionTable table =
      sort_contributors(intersect_pixels(out.splats, samples, cfg, &out.trace), &out.trace);

  out.records.resize(table.pixels.size());
  parallel_for(table.pixels.size(), cfg.threads, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i)
      out.records[i] = rasterize_pixel(table.pixels[i], table.entries[i], cfg);
  });
  out.trace.rendered_pixels = out.records.size();
  for (const auto& r : out.records) out.trace.integrated_pairs += r.contributors.size();
  return out;
}

DenseRender render_dense_reference(const Scene& scene, const CameraPose& cam,
                                   const RenderConfig& cfg, bool keep_contributors) {
  cfg.validate();
  DenseRender out;
  const ProjectedScene projected = project_scene(scene, cam, cfg);
  const auto& splats = projected.splats;
  out.projection = projected.counts;
  out.trace.projected_gaussians = splats.size();
  out.image = ImageRGB(cam.width, cam.height, cfg.background);
  out.transmittance = ScalarGrid(cam.width, cam.height, 1.0);
  out.depth = ScalarGrid(cam.width, cam.height, 0.0);
  if (keep_contributors) out.contributor_ids.resize(static_cast<std::size_t>(cam.width) * cam.height);

  // Tile-level intersection: every tile overlapped by a splat's bbox lists it.
  const int tiles_x = (cam.width + kDenseTileSize - 1) / kDenseTileSize;
  const int tiles_y = (cam.height + kDenseTileSize - 1) / kDenseTileSize;
  std::vector<std::vector<std::size_t>> tile_lists(static_cast<std::size_t>(tiles_x) * tiles_y);
  for (std::size_t i = 0; i < splats.size(); ++i) {
    const PixelRect& b = splats[i].bbox;
    for (int ty = b.y0 / kDenseTileSize; ty <= b.y1 / kDenseTileSize; ++ty)
      for (int tx = b.x0 / kDenseTileSize; tx <= b.x1 / kDenseTileSize; ++tx) {
        tile_lists[static_cast<std::size_t>(ty) * tiles_x + tx].push_back(i);
        ++out.trace.sort_keys;
      }
  }
  for (auto& list : tile_lists) {
    std::stable_sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
      const Splat2D& sa = splats[a];
      const Splat2D& sb = splats[b];
      return sa.depth != sb.depth ? sa.depth < sb.depth : sa.source_id < sb.source_id;
    });
  }

  const std::size_t workers = worker_count(tile_lists.size(), cfg.threads);
  std::vector<WorkloadTrace> worker_traces(workers);
  parallel_for(tile_lists.size(), cfg.threads, [&](std::size_t begin, std::size_t end, std::size_t w) {
    WorkloadTrace& tr = worker_traces[w];
    for (std::size_t tile = begin; tile < end; ++tile) {
      const auto& list = tile_lists[tile];
      const int tx = static_cast<int>(tile % tiles_x);
      const int ty = static_cast<int>(tile / tiles_x);
      const int x_end = std::min(cam.width, (tx + 1) * kDenseTileSize);
      const int y_end = std::min(cam.height, (ty + 1) * kDenseTileSize);
      for (int y = ty * kDenseTileSize; y < y_end; ++y) {
        for (int x = tx * kDenseTileSize; x < x_end; ++x) {
          double t = 1.0;
          Vec3 color = Vec3::Zero();
          double depth = 0.0;
          std::size_t count = 0;
          std::vector<std::int64_t>* ids =
              keep_contributors ? &out.contributor_ids[static_cast<std::size_t>(y) * cam.width + x]
                                : nullptr;
          for (std::size_t idx : list) {
            const Splat2D& s = splats[idx];
            ++tr.alpha_checks;
            if (!s.bbox.contains(x, y)) continue;
            const double a = evaluate_alpha(s, {x, y}, cfg);
            if (a <= cfg.alpha_threshold) continue;
            ++tr.alpha_passing_pairs;
            ++tr.integrated_pairs;
            ++count;
            color += t * a * s.color;
            depth += t * a * s.depth;
            t *= 1.0 - a;
            if (ids) ids->push_back(s.source_id);
            if (cfg.transmittance_floor > 0.0 && t < cfg.transmittance_floor) break;
          }
          out.image.at(x, y) = color + t * cfg.background;
          out.transmittance.at(x, y) = t;
          out.depth.at(x, y) = count > 0 ? depth / (1.0 - t) : 0.0;
        }
      }
    }
  });
  for (const auto& tr : worker_traces) out.trace += tr;
  out.trace.rendered_pixels = static_cast<std::uint64_t>(cam.width) * cam.height;
  return out;
}

}  // namespace sgslam
