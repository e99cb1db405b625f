// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "fd_oracle.hpp"
#include "oracles.hpp"
#include "scenes.hpp"

#include "sgslam/autodiff/gradcheck.hpp"
#include "sgslam/autodiff/gradients.hpp"
#include "sgslam/renderer/renderer.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sgslam {
namespace {

PixelRenderRecord record_with_color(const Vec3& c, double depth = 0.0) {
  PixelRenderRecord r;
  r.color = c;
  r.depth = depth;
  return r;
}

TEST(PixelLoss, EqualRenderGivesZero) {
  const PixelLoss l = pixel_loss(record_with_color(Vec3(0.2, 0.4, 0.6), 2.0), Vec3(0.2, 0.4, 0.6), 2.0, 0.1);
  EXPECT_EQ(l.loss, 0.0);
  EXPECT_EQ(l.dL_dcolor, Vec3::Zero());
  EXPECT_EQ(l.dL_ddepth, 0.0);
}

TEST(PixelLoss, MeanOverChannelsSign) {
  const PixelLoss l = pixel_loss(record_with_color(Vec3(0.5, 0, 0)), Vec3(1, 0, 0), std::nullopt, 0.0);
  EXPECT_NEAR(l.loss, 0.5 / 3.0, 1e-15);
  EXPECT_NEAR((l.dL_dcolor - Vec3(-1.0 / 3.0, 0, 0)).norm(), 0.0, 1e-15);
}

TEST(PixelLoss, DepthTermOnlyWithPositiveReference) {
  const PixelLoss with = pixel_loss(record_with_color(Vec3::Zero(), 2.5), Vec3::Zero(), 2.0, 0.1);
  EXPECT_NEAR(with.loss, 0.05, 1e-15);
  EXPECT_NEAR(with.dL_ddepth, 0.1, 1e-15);
  const PixelLoss invalid = pixel_loss(record_with_color(Vec3::Zero(), 2.5), Vec3::Zero(), 0.0, 0.1);
  EXPECT_EQ(invalid.loss, 0.0);
  EXPECT_EQ(invalid.dL_ddepth, 0.0);
}

TEST(PixelLoss, ColorGradientMatchesFiniteDifferences) {
  RngStream rng(1, RngPurpose::kTestScene);
  for (int i = 0; i < 100; ++i) {
    const Vec3 c(rng.uniform(), rng.uniform(), rng.uniform());
    const Vec3 ref(rng.uniform(), rng.uniform(), rng.uniform());
    const double d = rng.uniform(1, 3), dref = rng.uniform(1, 3);
    const PixelLoss l = pixel_loss(record_with_color(c, d), ref, dref, 0.1);
    for (int k = 0; k < 3; ++k) {
      const double fd = testing::central_difference(
          [&](double h) {
            Vec3 cc = c;
            cc[k] += h;
            return pixel_loss(record_with_color(cc, d), ref, dref, 0.1).loss;
          },
          1e-7);
      EXPECT_NEAR(l.dL_dcolor[k], fd, 1e-6);
    }
    const double fdd = testing::central_difference(
        [&](double h) { return pixel_loss(record_with_color(c, d + h), ref, dref, 0.1).loss; }, 1e-7);
    EXPECT_NEAR(l.dL_ddepth, fdd, 1e-6);
  }
}

struct OneSplat {
  std::vector<Splat2D> splats;
  PixelRenderRecord record;
};

OneSplat single_contributor(double opacity) {
  OneSplat o;
  Splat2D s;
  s.mean_px = Vec2(3.2, 4.1);
  s.conic << 0.3, 0.05, 0.05, 0.2;
  s.opacity = opacity;
  s.color = Vec3(0.3, 0.6, 0.9);
  s.depth = 2.0;
  s.bbox = {0, 0, 9, 9};
  o.splats.push_back(s);
  Contributor c;
  c.alpha = alpha_at(s, {3, 4});
  c.color = s.color;
  c.depth = s.depth;
  RenderConfig cfg;
  cfg.transmittance_floor = 0.0;
  o.record = rasterize_pixel({3, 4}, std::vector<Contributor>{c}, cfg);
  return o;
}

TEST(ReverseRasterize, SingleContributorColorGradientIsAlpha) {
  const OneSplat o = single_contributor(0.7);
  const PixelGradient g = reverse_rasterize(o.record, o.splats, Vec3(1, 0, 0));
  ASSERT_EQ(g.partials.size(), 1u);
  const double a = o.record.contributors[0].alpha;
  EXPECT_NEAR((g.partials[0].dL_dcolor - Vec3(a, 0, 0)).norm(), 0.0, 1e-15);
  // No later contributors and a black background: dC/dalpha = c.
  EXPECT_NEAR(g.partials[0].dL_dalpha, 0.3, 1e-15);
}

TEST(ReverseRasterize, ZeroUpstreamGivesZeroPartials) {
  const OneSplat o = single_contributor(0.7);
  const PixelGradient g = reverse_rasterize(o.record, o.splats, Vec3::Zero());
  for (double v : SplatGradient::flatten(g.partials[0])) EXPECT_EQ(v, 0.0);
}

TEST(ReverseRasterize, ClampedAlphaGetsZeroAlphaGradient) {
  OneSplat o = single_contributor(1.0);
  o.splats[0].mean_px = Vec2(3.5, 4.5);
  o.record.contributors[0].alpha = 0.99;
  RenderConfig cfg;
  cfg.transmittance_floor = 0.0;
  o.record = rasterize_pixel({3, 4}, o.record.contributors, cfg);
  const PixelGradient g = reverse_rasterize(o.record, o.splats, Vec3(1, 1, 1));
  EXPECT_EQ(g.saturated, 1u);
  EXPECT_EQ(g.partials[0].dL_dalpha, 0.0);
  EXPECT_EQ(g.partials[0].dL_dmean_px, Vec2::Zero());
  EXPECT_EQ(g.partials[0].dL_dopacity_logit, 0.0);
  EXPECT_NEAR(g.partials[0].dL_dcolor.x(), 0.99, 1e-15);
}

using Case = testing::FdCase;

Case make_case(std::uint64_t seed, int gaussians) { return testing::make_fd_case(seed, gaussians); }

TEST(FullChain, EveryParameterMatchesFiniteDifferences) {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const testing::FdSummary s = testing::fd_check_case(make_case(seed, 10));
    for (const auto& [group, worst] : s.worst) EXPECT_LE(worst, 1e-4) << group << " seed " << seed;
    for (const auto& [_, n] : s.checked) checked += n;
    EXPECT_EQ(s.checked.size(), 7u);
  }
  EXPECT_GT(checked, 600);
}

TEST(FullChain, LinearInUpstreamGradient) {
  const Case c = make_case(11, 10);
  const SparseRender r = render_sparse(c.scene, c.cam, c.samples, c.cfg);
  for (const PixelRenderRecord& rec : r.records) {
    const Vec3 up(0.3, -0.2, 0.7);
    const PixelGradient a = reverse_rasterize(rec, r.splats, up, 0.4);
    const PixelGradient b = reverse_rasterize(rec, r.splats, 2.0 * up, 0.8);
    ASSERT_EQ(a.partials.size(), b.partials.size());
    for (std::size_t i = 0; i < a.partials.size(); ++i) {
      const auto fa = SplatGradient::flatten(a.partials[i]);
      const auto fb = SplatGradient::flatten(b.partials[i]);
      for (std::size_t k = 0; k < fa.size(); ++k) EXPECT_EQ(fb[k], 2.0 * fa[k]);
    }
  }
}

TEST(FullChain, ZeroLossFixedPoint) {
  RngStream rng(12, RngPurpose::kTestScene);
  const CameraPose cam = testing::test_camera();
  const Scene scene = testing::random_scene(rng, cam, {.gaussians = 40});
  RenderConfig cfg;
  const DenseRender d = render_dense_reference(scene, cam, cfg);
  const SparseRender s = render_sparse(scene, cam, sample_tracking(64, 64, 4, 3), cfg);
  const FrameBackward bw = backward_frame(scene, cam, s, d.image, &d.depth, BackwardConfig{});
  // The dense reference accumulates in a different order, so residuals sit
  // at rounding level, inside the loss dead zone.
  EXPECT_LT(bw.loss, 1e-12);
  for (const GaussianGradient& g : bw.world.gaussians) {
    EXPECT_EQ(g.mean, Vec3::Zero());
    EXPECT_EQ(g.log_scale, Vec3::Zero());
    EXPECT_EQ(g.rotation, Vec3::Zero());
    EXPECT_EQ(g.color, Vec3::Zero());
    EXPECT_EQ(g.opacity_logit, 0.0);
  }
  EXPECT_EQ(bw.world.pose.rotation, Vec3::Zero());
  EXPECT_EQ(bw.world.pose.translation, Vec3::Zero());
}

PixelGradient pixel_touching(PixelCoord p, std::vector<std::pair<std::int64_t, double>> ids) {
  PixelGradient g;
  g.pixel = p;
  for (auto [id, v] : ids) {
    ContributorGradient c;
    c.gaussian_id = id;
    c.dL_dopacity_logit = v;
    c.dL_dcolor = Vec3(v, 2 * v, -v);
    g.partials.push_back(c);
  }
  return g;
}

TEST(Aggregate, TwoPixelsSumIntoOneGaussian) {
  const std::vector<PixelGradient> s{pixel_touching({0, 0}, {{7, 1.0}}), pixel_touching({1, 0}, {{7, 1.0}})};
  WorkloadTrace t;
  const ScreenGradientBuffer b = aggregate(s, 8, AggregationMode::kDeterministic, 1, &t);
  EXPECT_EQ(b.gaussians[7].dL_dopacity_logit, 2.0);
  EXPECT_EQ(b.touches[7], 2u);
  EXPECT_EQ(t.aggregation_conflicts, 1u);
  EXPECT_EQ(t.gradient_partials, 2u);
}

TEST(Aggregate, EmptyGivesZeroBuffer) {
  const ScreenGradientBuffer b = aggregate({}, 3);
  ASSERT_EQ(b.gaussians.size(), 3u);
  for (const auto& g : b.gaussians)
    for (double v : g.flatten()) EXPECT_EQ(v, 0.0);
}

TEST(Aggregate, DeterministicIsBitEqualToSequentialAndConcurrentIsClose) {
  const Case c = make_case(13, 10);
  RenderConfig cfg;
  cfg.transmittance_floor = 0.0;
  const SparseRender r = render_sparse(c.scene, c.cam, SampledPixelSet::dense(64, 32), cfg);
  std::vector<PixelGradient> stream;
  for (const auto& rec : r.records) stream.push_back(reverse_rasterize(rec, r.splats, Vec3(0.1, -0.2, 0.3), 0.05));
  std::sort(stream.begin(), stream.end(),
            [](const PixelGradient& a, const PixelGradient& b) { return row_major_less(a.pixel, b.pixel); });
  const auto oracle = testing::sequential_sums(stream, c.scene.size());
  const ScreenGradientBuffer det = aggregate(stream, c.scene.size(), AggregationMode::kDeterministic);
  for (int threads : {2, 4}) {
    const ScreenGradientBuffer con = aggregate(stream, c.scene.size(), AggregationMode::kConcurrent, threads);
    for (std::size_t i = 0; i < c.scene.size(); ++i) {
      const auto fc = con.gaussians[i].flatten();
      for (std::size_t k = 0; k < fc.size(); ++k)
        EXPECT_LE(std::abs(fc[k] - oracle[i][k]), 1e-9 * std::max(1e-12, std::abs(oracle[i][k])));
    }
  }
  for (std::size_t i = 0; i < c.scene.size(); ++i) EXPECT_EQ(det.gaussians[i].flatten(), oracle[i]);
}

TEST(Reproject, IdentityCameraPassesMeanGradientThrough) {
  const Case c = make_case(14, 6);
  CameraPose cam = c.cam;
  cam.rotation = Quat::Identity();
  cam.translation = Vec3::Zero();
  // With W = I the world mean gradient is the camera-frame one, so the
  // translation gradient is their sum.
  const SparseRender r = render_sparse(c.scene, cam, c.samples, c.cfg);
  const FrameBackward bw = backward_frame(c.scene, cam, r, c.ref, &c.ref_depth, BackwardConfig{});
  Vec3 sum = Vec3::Zero();
  for (const auto& g : bw.world.gaussians) sum += g.mean;
  EXPECT_NEAR((bw.world.pose.translation - sum).norm(), 0.0, 1e-12);
}

TEST(Reproject, PureTranslationCameraGivesPlusSumOfMeanGradients) {
  const Case c = make_case(15, 8);
  CameraPose cam = c.cam;
  cam.rotation = Quat::Identity();
  cam.translation = Vec3(0.05, -0.02, 0.1);
  const SparseRender r = render_sparse(c.scene, cam, c.samples, c.cfg);
  const FrameBackward bw = backward_frame(c.scene, cam, r, c.ref, &c.ref_depth, BackwardConfig{});
  Vec3 sum = Vec3::Zero();
  for (const auto& g : bw.world.gaussians) sum += g.mean;
  EXPECT_NEAR((bw.world.pose.translation - sum).norm(), 0.0, 1e-12);
}

TEST(GradientDump, OneLinePerParameterGroup) {
  GradientBuffer g;
  g.gaussians.resize(2);
  g.gaussians[1].opacity_logit = 0.5;
  std::ostringstream os;
  write_gradient_dump(os, g);
  const std::string s = os.str();
  EXPECT_NE(s.find("1 opacity_logit 0.5"), std::string::npos);
  EXPECT_NE(s.find("pose rotation"), std::string::npos);
  EXPECT_NE(s.find("pose translation"), std::string::npos);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 2 * 5 + 2);
}

TEST(GradCheckSuite, PassesOnSmallRun) {
  GradCheckConfig cfg;
  cfg.scenes = 3;
  const GradCheckReport r = run_gradcheck(cfg);
  EXPECT_TRUE(r.passed());
  EXPECT_LE(r.max_rel_error, 1e-4);
}

TEST(GradCheckSuite, RelativeErrorFloor) {
  EXPECT_NEAR(gradcheck_rel_error(1.0, 1.0001, 1e-4), 0.0001 / 1.0001, 1e-15);
  EXPECT_DOUBLE_EQ(gradcheck_rel_error(0.0, 1e-9, 1e-4), 1e-5);
}

}  // namespace
}  // namespace sgslam
