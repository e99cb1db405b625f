// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/autodiff/gradcheck.hpp"

#include "sgslam/core/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

namespace sgslam {
namespace {

using Structure = std::vector<std::vector<std::int64_t>>;

Structure structure_of(const SparseRender& r) {
  Structure s(r.records.size());
  for (std::size_t i = 0; i < r.records.size(); ++i)
    for (const auto& c : r.records[i].contributors) s[i].push_back(c.gaussian_id);
  return s;
}

double offset(RngStream& rng) {
  const double mag = rng.uniform(0.05, 0.3);
  return rng.uniform() < 0.5 ? -mag : mag;
}

}  // namespace

void GradCheckReport::merge(const GradCheckReport& o) {
  entries.insert(entries.end(), o.entries.begin(), o.entries.end());
  max_rel_error = std::max(max_rel_error, o.max_rel_error);
  checked += o.checked;
  failures += o.failures;
  skipped_discontinuous += o.skipped_discontinuous;
}

double gradcheck_rel_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckCase make_gradcheck_case(const GradCheckConfig& cfg, int index) {
  RngStream rng(cfg.seed, RngPurpose::kTestScene, static_cast<std::uint64_t>(index));
  GradCheckCase c;
  c.cam.width = cfg.width;
  c.cam.height = cfg.height;
  c.cam.intrinsics = {40.0, 40.0, cfg.width / 2.0, cfg.height / 2.0};
  const Vec3 axis(rng.normal(), rng.normal(), rng.normal());
  c.cam.rotation = so3_exp(axis.normalized() * rng.uniform(0.0, 0.2));
  c.cam.translation = Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
  c.samples = sample_tracking(cfg.width, cfg.height, cfg.tile_size, rng.below(1u << 30));

  const Intrinsics& in = c.cam.intrinsics;
  for (int k = 0; k < cfg.gaussians; ++k) {
    const PixelCoord p = c.samples.pixels[rng.below(c.samples.pixels.size())];
    const double z = rng.uniform(2.0, 4.0);
    const double u = p.x + 0.5 + rng.uniform(-2.0, 2.0);
    const double v = p.y + 0.5 + rng.uniform(-2.0, 2.0);
    const Vec3 p_cam((u - in.cx) * z / in.fx, (v - in.cy) * z / in.fy, z);
    Gaussian3D g;
    g.mean_world = c.cam.rotation.conjugate() * (p_cam - c.cam.translation);
    const double sigma = rng.uniform(1.5, 4.0) * z / in.fx;
    for (int a = 0; a < 3; ++a) g.log_scale[a] = std::log(sigma) + rng.uniform(-0.3, 0.3);
    const Vec3 r(rng.normal(), rng.normal(), rng.normal());
    g.rotation = so3_exp(r.normalized() * rng.uniform(0.0, std::numbers::pi));
    g.opacity_logit = logit(rng.uniform(0.3, 0.9));
    g.color = Vec3(rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9));
    c.scene.append(g);
  }

  // References sit at least 0.05 away from the rendered values so no
  // perturbation of size h crosses the kink of |x|.
  const SparseRender r = render_sparse(c.scene, c.cam, c.samples, c.render);
  c.ref_color = ImageRGB(cfg.width, cfg.height);
  c.ref_depth = ScalarGrid(cfg.width, cfg.height);
  for (const auto& rec : r.records) {
    c.ref_color.at(rec.pixel.x, rec.pixel.y) =
        rec.color + Vec3(offset(rng), offset(rng), offset(rng));
    if (!rec.contributors.empty())
      c.ref_depth.at(rec.pixel.x, rec.pixel.y) = std::max(0.5, rec.depth + offset(rng));
  }
  return c;
}

GradCheckReport check_case(const GradCheckCase& c, const GradCheckConfig& cfg, int scene_index) {
  GradCheckReport report;
  const SparseRender base = render_sparse(c.scene, c.cam, c.samples, c.render);
  const Structure base_structure = structure_of(base);
  BackwardConfig bcfg;
  bcfg.lambda_depth = cfg.lambda_depth;
  bcfg.background = c.render.background;
  const FrameBackward bw = backward_frame(c.scene, c.cam, base, c.ref_color, &c.ref_depth, bcfg);

  // Evaluates the loss with a perturbation applied; nullopt if the
  // contributor structure changed.
  using Mutator = std::function<void(Scene&, CameraPose&, double)>;
  auto probe = [&](const Mutator& mutate, double step) -> std::optional<double> {
    Scene s = c.scene;
    CameraPose cam = c.cam;
    mutate(s, cam, step);
    const SparseRender r = render_sparse(s, cam, c.samples, c.render);
    if (structure_of(r) != base_structure) return std::nullopt;
    return frame_loss(r, c.ref_color, &c.ref_depth, cfg.lambda_depth);
  };
  auto check = [&](std::int64_t gid, const char* name, int comp, double analytic,
                   const Mutator& mutate) {
    const auto plus = probe(mutate, cfg.h);
    const auto minus = probe(mutate, -cfg.h);
    if (!plus || !minus) {
      ++report.skipped_discontinuous;
      return;
    }
    const double numeric = (*plus - *minus) / (2.0 * cfg.h);
    GradCheckEntry e{scene_index, gid, name, comp, analytic, numeric,
                     gradcheck_rel_error(analytic, numeric, cfg.floor)};
    report.max_rel_error = std::max(report.max_rel_error, e.rel_error);
    ++report.checked;
    if (!(e.rel_error <= cfg.tolerance)) ++report.failures;
    report.entries.push_back(std::move(e));
  };

  for (std::size_t i = 0; i < c.scene.size(); ++i) {
    const auto id = static_cast<std::int64_t>(i);
    const GaussianGradient& g = bw.world.gaussians[i];
    for (int k = 0; k < 3; ++k) {
      check(id, "mean", k, g.mean[k],
            [=](Scene& s, CameraPose&, double d) { s[i].mean_world[k] += d; });
      check(id, "log_scale", k, g.log_scale[k],
            [=](Scene& s, CameraPose&, double d) { s[i].log_scale[k] += d; });
      check(id, "rotation", k, g.rotation[k], [=](Scene& s, CameraPose&, double d) {
        s[i].rotation = s[i].rotation * so3_exp(Vec3::Unit(k) * d);
      });
      check(id, "color", k, g.color[k],
            [=](Scene& s, CameraPose&, double d) { s[i].color[k] += d; });
    }
    check(id, "opacity_logit", 0, g.opacity_logit,
          [=](Scene& s, CameraPose&, double d) { s[i].opacity_logit += d; });
  }
  for (int k = 0; k < 3; ++k) {
    check(-1, "pose_rotation", k, bw.world.pose.rotation[k], [=](Scene&, CameraPose& cam, double d) {
      const Quat dq = so3_exp(Vec3::Unit(k) * d);
      cam.rotation = dq * cam.rotation;
      cam.translation = dq * cam.translation;
    });
    check(-1, "pose_translation", k, bw.world.pose.translation[k],
          [=](Scene&, CameraPose& cam, double d) { cam.translation[k] += d; });
  }
  return report;
}

GradCheckReport run_gradcheck(const GradCheckConfig& cfg) {
  GradCheckReport report;
  for (int i = 0; i < cfg.scenes; ++i) report.merge(check_case(make_gradcheck_case(cfg, i), cfg, i));
  return report;
}

}  // namespace sgslam
