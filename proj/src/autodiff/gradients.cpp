// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/autodiff/gradients.hpp"

#include "sgslam/core/gaussian_ops.hpp"
#include "sgslam/core/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <ostream>

namespace sgslam {
namespace {

// Residuals this small are summation-order noise and get the zero subgradient.
constexpr double kL1DeadZone = 1e-12;

double sign(double v) { return v > kL1DeadZone ? 1.0 : (v < -kL1DeadZone ? -1.0 : 0.0); }

constexpr double kSaturationGap = 1e-6;

}  // namespace

PixelLoss pixel_loss(const PixelRenderRecord& rendered, const Vec3& ref_color,
                     std::optional<double> ref_depth, double lambda_depth) {
  PixelLoss out;
  const Vec3 diff = rendered.color - ref_color;
  for (int k = 0; k < 3; ++k) {
    out.loss += std::abs(diff[k]) / 3.0;
    out.dL_dcolor[k] = sign(diff[k]) / 3.0;
  }
  if (ref_depth && *ref_depth > 0.0 && lambda_depth != 0.0) {
    const double dd = rendered.depth - *ref_depth;
    out.loss += lambda_depth * std::abs(dd);
    out.dL_ddepth = lambda_depth * sign(dd);
  }
  return out;
}

PixelGradient reverse_rasterize(const PixelRenderRecord& record, std::span<const Splat2D> splats,
                                const Vec3& dL_dC, double dL_dD, const Vec3& background) {
  PixelGradient out;
  out.pixel = record.pixel;
  out.dL_dC = dL_dC;
  out.dL_dD = dL_dD;
  const std::size_t n = record.contributors.size();
  out.partials.resize(n);
  if (n == 0) return out;

  const Vec3 c_total = record.prefix_color[n - 1];
  const double a_total = record.prefix_depth[n - 1];
  const double t_final = record.final_transmittance;
  const double w = 1.0 - t_final;
  const bool use_depth = dL_dD != 0.0 && w > 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const Contributor& c = record.contributors[i];
    const double gamma = record.transmittance[i];
    const double alpha = c.alpha;
    ContributorGradient& g = out.partials[i];
    g.splat = c.splat;
    g.gaussian_id = c.gaussian_id;
    g.dL_dcolor = dL_dC * (gamma * alpha);
    if (use_depth) g.dL_ddepth = dL_dD * gamma * alpha / w;

    if (alpha >= kAlphaMax || 1.0 - alpha < kSaturationGap) {
      ++out.saturated;
      continue;
    }
    const double inv = 1.0 / (1.0 - alpha);
    const Vec3 suffix = c_total - record.prefix_color[i];
    double dalpha = dL_dC.dot(gamma * c.color - suffix * inv - t_final * background * inv);
    if (use_depth) {
      const double da = gamma * c.depth - (a_total - record.prefix_depth[i]) * inv;
      const double dw = t_final * inv;
      dalpha += dL_dD * (da * w - a_total * dw) / (w * w);
    }
    g.dL_dalpha = dalpha;

    // alpha = o * exp(-q / 2), q = d^T Q d, d = p + 0.5 - mean.
    const Splat2D& s = splats[c.splat];
    const Vec2 d(record.pixel.x + 0.5 - s.mean_px.x(), record.pixel.y + 0.5 - s.mean_px.y());
    const double dq = -0.5 * alpha * dalpha;
    g.dL_dmean_px = dalpha * alpha * (s.conic * d);
    g.dL_dconic = Vec3(dq * d.x() * d.x(), dq * 2.0 * d.x() * d.y(), dq * d.y() * d.y());
    g.dL_dopacity_logit = dalpha * alpha * (1.0 - s.opacity);
  }
  return out;
}

std::array<double, kSplatGradientFloats> SplatGradient::flatten() const {
  return {dL_dalpha,      dL_dopacity_logit, dL_dcolor.x(),  dL_dcolor.y(),
          dL_dcolor.z(),  dL_dmean_px.x(),   dL_dmean_px.y(), dL_dconic.x(),
          dL_dconic.y(),  dL_dconic.z(),     dL_ddepth};
}

SplatGradient SplatGradient::from_flat(const std::array<double, kSplatGradientFloats>& v) {
  SplatGradient g;
  g.dL_dalpha = v[0];
  g.dL_dopacity_logit = v[1];
  g.dL_dcolor = Vec3(v[2], v[3], v[4]);
  g.dL_dmean_px = Vec2(v[5], v[6]);
  g.dL_dconic = Vec3(v[7], v[8], v[9]);
  g.dL_ddepth = v[10];
  return g;
}

std::array<double, kSplatGradientFloats> SplatGradient::flatten(const ContributorGradient& c) {
  return {c.dL_dalpha,     c.dL_dopacity_logit, c.dL_dcolor.x(),   c.dL_dcolor.y(),
          c.dL_dcolor.z(), c.dL_dmean_px.x(),   c.dL_dmean_px.y(), c.dL_dconic.x(),
          c.dL_dconic.y(), c.dL_dconic.z(),     c.dL_ddepth};
}

ScreenGradientBuffer aggregate(std::span<const PixelGradient> partials, std::size_t scene_size,
                               AggregationMode mode, int threads, WorkloadTrace* trace) {
  ScreenGradientBuffer out;
  out.gaussians.resize(scene_size);
  out.touches.assign(scene_size, 0);
  std::vector<double> flat(scene_size * kSplatGradientFloats, 0.0);

  std::uint64_t total = 0;
  for (const auto& p : partials) {
    for (const auto& c : p.partials) {
      if (c.gaussian_id < 0 || static_cast<std::size_t>(c.gaussian_id) >= scene_size)
        throw std::out_of_range("partial refers to a Gaussian outside the scene");
    }
    total += p.partials.size();
  }

  if (mode == AggregationMode::kDeterministic) {
    struct Ref {
      std::int64_t id;
      PixelCoord pixel;
      const ContributorGradient* g;
    };
    std::vector<Ref> refs;
    refs.reserve(total);
    for (const auto& p : partials)
      for (const auto& c : p.partials) refs.push_back({c.gaussian_id, p.pixel, &c});
    std::stable_sort(refs.begin(), refs.end(), [](const Ref& a, const Ref& b) {
      if (a.id != b.id) return a.id < b.id;
      return row_major_less(a.pixel, b.pixel);
    });
    for (const Ref& r : refs) {
      const auto v = SplatGradient::flatten(*r.g);
      double* dst = &flat[static_cast<std::size_t>(r.id) * kSplatGradientFloats];
      for (int k = 0; k < kSplatGradientFloats; ++k) dst[k] += v[k];
      ++out.touches[r.id];
    }
  } else {
    parallel_for(partials.size(), threads, [&](std::size_t begin, std::size_t end, std::size_t) {
      for (std::size_t i = begin; i < end; ++i) {
        for (const auto& c : partials[i].partials) {
          const auto v = SplatGradient::flatten(c);
          const std::size_t base = static_cast<std::size_t>(c.gaussian_id) * kSplatGradientFloats;
          for (int k = 0; k < kSplatGradientFloats; ++k)
            std::atomic_ref<double>(flat[base + k]).fetch_add(v[k], std::memory_order_relaxed);
          std::atomic_ref<std::uint32_t>(out.touches[c.gaussian_id])
              .fetch_add(1, std::memory_order_relaxed);
        }
      }
    });
  }

  std::uint64_t conflicts = 0;
  for (std::size_t i = 0; i < scene_size; ++i) {
    std::array<double, kSplatGradientFloats> v;
    std::copy_n(&flat[i * kSplatGradientFloats], kSplatGradientFloats, v.begin());
    out.gaussians[i] = SplatGradient::from_flat(v);
    if (out.touches[i] > 1) conflicts += out.touches[i] - 1;
  }
  if (trace) {
    trace->gradient_partials += total;
    trace->aggregation_conflicts += conflicts;
  }
  return out;
}

GradientBuffer reproject(const ScreenGradientBuffer& screen, const CameraPose& cam,
                         const Scene& scene) {
  if (screen.gaussians.size() != scene.size())
    throw std::invalid_argument("gradient buffer and scene sizes differ");
  GradientBuffer out;
  out.gaussians.resize(scene.size());
  const Mat3 w_cam = cam.rotation_matrix();
  const double fx = cam.intrinsics.fx;
  const double fy = cam.intrinsics.fy;

  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (screen.touches[i] == 0) continue;
    const Gaussian3D& gauss = scene[i];
    const SplatGradient& sg = screen.gaussians[i];
    const CameraSpaceGaussian cs = to_camera_space(gauss, cam);
    const double x = cs.p_cam.x(), y = cs.p_cam.y(), z = cs.p_cam.z();
    const Mat23& j = cs.jacobian;
    const Mat3& m = cs.cov_cam;
    const Mat2 q = cs.cov2d.inverse();

    Mat2 g_conic;
    g_conic << sg.dL_dconic.x(), 0.5 * sg.dL_dconic.y(), 0.5 * sg.dL_dconic.y(), sg.dL_dconic.z();
    const Mat2 g_cov2d = -q * g_conic * q;
    const Mat3 g_m = j.transpose() * g_cov2d * j;
    const Mat23 g_j = 2.0 * g_cov2d * j * m;

    Vec3 g_pc = j.transpose() * sg.dL_dmean_px;
    g_pc.z() += sg.dL_ddepth;
    const double z2 = z * z, z3 = z2 * z;
    g_pc.x() += g_j(0, 2) * (-fx / z2);
    g_pc.y() += g_j(1, 2) * (-fy / z2);
    g_pc.z() += g_j(0, 0) * (-fx / z2) + g_j(0, 2) * (2.0 * fx * x / z3) +
                g_j(1, 1) * (-fy / z2) + g_j(1, 2) * (2.0 * fy * y / z3);

    GaussianGradient& out_g = out.gaussians[i];
    out_g.mean = w_cam.transpose() * g_pc;

    const Mat3 g_sigma = w_cam.transpose() * g_m * w_cam;
    const Mat3 rg = gauss.rotation.toRotationMatrix();
    const Vec3 var = (2.0 * gauss.log_scale).array().exp();
    const Mat3 a = rg.transpose() * (2.0 * g_sigma * rg * var.asDiagonal());
    out_g.rotation = Vec3(a(2, 1) - a(1, 2), a(0, 2) - a(2, 0), a(1, 0) - a(0, 1));
    const Mat3 b = rg.transpose() * g_sigma * rg;
    for (int k = 0; k < 3; ++k) out_g.log_scale[k] = 2.0 * var[k] * b(k, k);
    out_g.opacity_logit = sg.dL_dopacity_logit;
    out_g.color = sg.dL_dcolor;

    out.pose.translation += g_pc;
    out.pose.rotation += cs.p_cam.cross(g_pc);
    for (int k = 0; k < 3; ++k) {
      const Mat3 em = skew(Vec3::Unit(k)) * m;
      out.pose.rotation[k] += 2.0 * (g_m.array() * em.array()).sum();
    }
  }
  return out;
}

namespace {

std::vector<PixelLoss> pixel_losses(const SparseRender& render, const ImageRGB& ref_color,
                                    const ScalarGrid* ref_depth, double lambda_depth) {
  std::vector<PixelLoss> out(render.records.size());
  for (std::size_t i = 0; i < render.records.size(); ++i) {
    const PixelRenderRecord& r = render.records[i];
    std::optional<double> rd;
    if (ref_depth) rd = ref_depth->at(r.pixel);
    out[i] = pixel_loss(r, ref_color.at(r.pixel), rd, lambda_depth);
  }
  return out;
}

}  // namespace

double frame_loss(const SparseRender& render, const ImageRGB& ref_color,
                  const ScalarGrid* ref_depth, double lambda_depth) {
  if (render.records.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& l : pixel_losses(render, ref_color, ref_depth, lambda_depth)) sum += l.loss;
  return sum / static_cast<double>(render.records.size());
}

FrameBackward backward_frame(const Scene& scene, const CameraPose& cam, const SparseRender& render,
                             const ImageRGB& ref_color, const ScalarGrid* ref_depth,
                             const BackwardConfig& cfg) {
  FrameBackward out;
  const std::size_t n = render.records.size();
  const auto losses = pixel_losses(render, ref_color, ref_depth, cfg.lambda_depth);
  const double inv_n = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  for (const auto& l : losses) out.loss += l.loss;
  out.loss *= inv_n;

  out.pixels.resize(n);
  parallel_for(n, cfg.threads, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i)
      out.pixels[i] = reverse_rasterize(render.records[i], render.splats,
                                        losses[i].dL_dcolor * inv_n, losses[i].dL_ddepth * inv_n,
                                        cfg.background);
  });
  for (const auto& p : out.pixels) out.saturated += p.saturated;
  out.screen = aggregate(out.pixels, scene.size(), cfg.mode, cfg.threads, &out.trace);
  out.world = reproject(out.screen, cam, scene);
  return out;
}

void write_gradient_dump(std::ostream& os, const GradientBuffer& g) {
  char buf[160];
  auto vec = [&](const char* head, std::int64_t id, const char* name, const Vec3& v) {
    if (id >= 0)
      std::snprintf(buf, sizeof buf, "%lld %s %.17g %.17g %.17g\n", static_cast<long long>(id),
                    name, v.x(), v.y(), v.z());
    else
      std::snprintf(buf, sizeof buf, "%s %s %.17g %.17g %.17g\n", head, name, v.x(), v.y(), v.z());
    os << buf;
  };
  for (std::size_t i = 0; i < g.gaussians.size(); ++i) {
    const auto id = static_cast<std::int64_t>(i);
    const GaussianGradient& gg = g.gaussians[i];
    vec("", id, "mean", gg.mean);
    vec("", id, "log_scale", gg.log_scale);
    vec("", id, "rotation", gg.rotation);
    std::snprintf(buf, sizeof buf, "%lld opacity_logit %.17g\n", static_cast<long long>(id),
                  gg.opacity_logit);
    os << buf;
    vec("", id, "color", gg.color);
  }
  vec("pose", -1, "rotation", g.pose.rotation);
  vec("pose", -1, "translation", g.pose.translation);
}

}  // namespace sgslam
