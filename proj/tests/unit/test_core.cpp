// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"
#include "scenes.hpp"

#include "sgslam/core/gaussian_ops.hpp"
#include "sgslam/core/random.hpp"
#include "sgslam/core/scene_io.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

namespace sgslam {
namespace {

using testing::covariance_oracle;
using testing::project_oracle;
using testing::test_camera;

TEST(BuildCovariance, UnitScaleIdentityRotationIsIdentity) {
  EXPECT_TRUE(build_covariance(Vec3::Zero(), Quat::Identity()).isApprox(Mat3::Identity(), 1e-15));
}

TEST(BuildCovariance, ScaleIsSquared) {
  const Mat3 c = build_covariance(Vec3(std::log(2.0), 0, 0), Quat::Identity());
  EXPECT_TRUE(c.isApprox(Vec3(4, 1, 1).asDiagonal().toDenseMatrix(), 1e-12));
}

TEST(BuildCovariance, QuarterTurnAboutZSwapsAxes) {
  const Quat q(Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitZ()));
  const Mat3 c = build_covariance(Vec3(std::log(2.0), 0, 0), q);
  EXPECT_NEAR(c(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(c(1, 1), 4.0, 1e-12);
  EXPECT_NEAR(c(2, 2), 1.0, 1e-12);
  EXPECT_NEAR(c(0, 1), 0.0, 1e-12);
}

TEST(BuildCovariance, MatchesOracleAndIsPositiveDefinite) {
  RngStream rng(3, RngPurpose::kTestScene);
  for (int i = 0; i < 200; ++i) {
    const Vec3 ls(rng.uniform(-5, 2), rng.uniform(-5, 2), rng.uniform(-5, 2));
    const Quat q = so3_exp(Vec3(rng.normal(), rng.normal(), rng.normal()));
    const Mat3 c = build_covariance(ls, q);
    EXPECT_TRUE(c.isApprox(covariance_oracle(ls, q), 1e-10));
    EXPECT_EQ(Eigen::LLT<Mat3>(c).info(), Eigen::Success);
  }
}

Gaussian3D axis_gaussian() {
  Gaussian3D g;
  g.mean_world = Vec3(0, 0, 2);
  g.log_scale = Vec3::Constant(std::log(0.1));
  g.opacity_logit = logit(0.8);
  return g;
}

TEST(ProjectGaussian, OnOpticalAxis) {
  const CameraPose cam = test_camera(64, 64, 100.0);
  const auto r = project_gaussian(axis_gaussian(), 0, cam);
  ASSERT_TRUE(r);
  EXPECT_NEAR(r.splat->mean_px.x(), 32.0, 1e-12);
  EXPECT_NEAR(r.splat->mean_px.y(), 32.0, 1e-12);
  EXPECT_NEAR(r.splat->depth, 2.0, 1e-12);
}

TEST(ProjectGaussian, ConicOnAxis) {
  const CameraPose cam = test_camera(64, 64, 100.0);
  const auto r = project_gaussian(axis_gaussian(), 0, cam);
  ASSERT_TRUE(r);
  // Sigma' = (f/z)^2 * 0.01 * I = 25 I.
  EXPECT_TRUE(r.splat->conic.isApprox(0.04 * Mat2::Identity(), 1e-12));
}

TEST(ProjectGaussian, BehindCameraIsAbsent) {
  const CameraPose cam = test_camera(64, 64, 100.0);
  Gaussian3D g = axis_gaussian();
  g.mean_world.z() = -1.0;
  const auto r = project_gaussian(g, 0, cam);
  EXPECT_FALSE(r);
  EXPECT_EQ(r.outcome, ProjectionOutcome::kBehindNearPlane);
}

TEST(ProjectGaussian, FarOutsideImageIsAbsent) {
  const CameraPose cam = test_camera(64, 64, 100.0);
  Gaussian3D g = axis_gaussian();
  g.mean_world.x() = 10.0;
  EXPECT_EQ(project_gaussian(g, 0, cam).outcome, ProjectionOutcome::kOutsideImage);
}

TEST(ProjectGaussian, MatchesOracleOnRandomScenes) {
  RngStream rng(5, RngPurpose::kTestScene);
  for (int s = 0; s < 20; ++s) {
    const CameraPose cam = testing::jitter_pose(rng, test_camera(), 0.3, 0.5);
    const Scene scene = testing::random_scene(rng, cam);
    for (const Gaussian3D& g : scene) {
      const auto lib = project_gaussian(g, static_cast<std::size_t>(g.id), cam);
      const auto ref = project_oracle(g, cam);
      ASSERT_EQ(static_cast<bool>(lib), ref.has_value());
      if (!ref) continue;
      EXPECT_TRUE(lib.splat->mean_px.isApprox(ref->mean_px, 1e-10));
      EXPECT_TRUE(lib.splat->conic.isApprox(ref->conic, 1e-8));
      EXPECT_NEAR(lib.splat->depth, ref->depth, 1e-12);
      EXPECT_EQ(lib.splat->bbox.x0, ref->x0);
      EXPECT_EQ(lib.splat->bbox.x1, ref->x1);
      EXPECT_EQ(lib.splat->bbox.y0, ref->y0);
      EXPECT_EQ(lib.splat->bbox.y1, ref->y1);
    }
  }
}

TEST(ProjectGaussian, SplatInvariants) {
  RngStream rng(6, RngPurpose::kTestScene);
  for (int s = 0; s < 20; ++s) {
    const CameraPose cam = test_camera();
    const Scene scene = testing::random_scene(rng, cam);
    for (const Gaussian3D& g : scene) {
      const auto r = project_gaussian(g, 0, cam);
      if (!r) continue;
      const Splat2D& sp = *r.splat;
      const Eigen::SelfAdjointEigenSolver<Mat2> eig(sp.conic);
      EXPECT_GT(eig.eigenvalues().minCoeff(), 0.0);
      EXPECT_NEAR(sp.conic(0, 1), sp.conic(1, 0), 1e-12);
      EXPECT_GT(sp.depth, kDefaultNearPlane);
      EXPECT_GE(sp.bbox.x0, 0);
      EXPECT_LE(sp.bbox.x1, cam.width - 1);
      EXPECT_GE(sp.bbox.y0, 0);
      EXPECT_LE(sp.bbox.y1, cam.height - 1);
      const int mx = static_cast<int>(std::floor(sp.mean_px.x()));
      const int my = static_cast<int>(std::floor(sp.mean_px.y()));
      if (mx >= 0 && mx < cam.width && my >= 0 && my < cam.height) {
        EXPECT_TRUE(sp.bbox.contains(mx, my));
      }
    }
  }
}

TEST(ProjectGaussian, PixelsOutsideBboxAreBeyondExtent) {
  RngStream rng(7, RngPurpose::kTestScene);
  const CameraPose cam = test_camera();
  const Scene scene = testing::random_scene(rng, cam, {.gaussians = 60});
  const double extent_sq = kDefaultSigmaExtent * kDefaultSigmaExtent;
  for (const Gaussian3D& g : scene) {
    const auto r = project_gaussian(g, 0, cam);
    if (!r) continue;
    const PixelRect& b = r.splat->bbox;
    // Ring of pixels just outside the bbox, skipping the parts clipped by the image.
    for (int x = b.x0 - 1; x <= b.x1 + 1; ++x) {
      for (int y : {b.y0 - 1, b.y1 + 1}) {
        if (x < 0 || y < 0 || x >= cam.width || y >= cam.height) continue;
        EXPECT_GE(mahalanobis_sq(*r.splat, {x, y}), extent_sq - 1e-9);
      }
    }
    for (int y = b.y0; y <= b.y1; ++y) {
      for (int x : {b.x0 - 1, b.x1 + 1}) {
        if (x < 0 || x >= cam.width) continue;
        EXPECT_GE(mahalanobis_sq(*r.splat, {x, y}), extent_sq - 1e-9);
      }
    }
  }
}

TEST(ProjectGaussian, InvariantUnderSharedWorldRotation) {
  RngStream rng(8, RngPurpose::kTestScene);
  for (int i = 0; i < 50; ++i) {
    const CameraPose cam = testing::jitter_pose(rng, test_camera(), 0.2, 0.3);
    const Scene scene = testing::random_scene(rng, cam, {.gaussians = 1});
    const Gaussian3D& g = scene[0];
    const Quat w = so3_exp(Vec3(rng.normal(), rng.normal(), rng.normal()));
    Gaussian3D g2 = g;
    g2.mean_world = w * g.mean_world;
    g2.rotation = w * g.rotation;
    CameraPose cam2 = cam;
    cam2.rotation = cam.rotation * w.conjugate();
    const auto a = project_gaussian(g, 0, cam);
    const auto b = project_gaussian(g2, 0, cam2);
    ASSERT_EQ(static_cast<bool>(a), static_cast<bool>(b));
    if (!a) continue;
    EXPECT_NEAR((a.splat->mean_px - b.splat->mean_px).norm(), 0.0, 1e-9);
    EXPECT_NEAR((a.splat->conic - b.splat->conic).norm(), 0.0, 1e-9 * a.splat->conic.norm());
    EXPECT_NEAR(a.splat->depth, b.splat->depth, 1e-9);
  }
}

Splat2D unit_splat(double opacity) {
  Splat2D s;
  s.mean_px = Vec2(10.5, 10.5);
  s.conic = Mat2::Identity();
  s.opacity = opacity;
  return s;
}

TEST(AlphaAt, CenterGivesOpacity) { EXPECT_DOUBLE_EQ(alpha_at(unit_splat(0.7), {10, 10}), 0.7); }

TEST(AlphaAt, MahalanobisTwoGivesInverseE) {
  Splat2D s = unit_splat(0.8);
  s.conic = Mat2::Identity() * 2.0;  // d = (1, 0) gives q = 2
  EXPECT_NEAR(alpha_at(s, {11, 10}), 0.8 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(alpha_at(s, {11, 10}), 0.2943, 1e-4);
}

TEST(AlphaAt, ClampsAtMaximum) { EXPECT_DOUBLE_EQ(alpha_at(unit_splat(1.0), {10, 10}), 0.99); }

TEST(AlphaAt, AlwaysWithinBounds) {
  RngStream rng(9, RngPurpose::kTestScene);
  for (int i = 0; i < 10000; ++i) {
    Splat2D s = unit_splat(rng.uniform());
    s.mean_px = Vec2(rng.uniform(0, 20), rng.uniform(0, 20));
    const double a = alpha_at(s, {static_cast<int>(rng.below(20)), static_cast<int>(rng.below(20))});
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 0.99);
  }
}

TEST(CameraPose, ComposeWithInverseIsIdentity) {
  RngStream rng(10, RngPurpose::kTestScene);
  for (int i = 0; i < 100; ++i) {
    const CameraPose p = testing::jitter_pose(rng, test_camera(), 3.0, 5.0);
    const CameraPose id = p * p.inverse();
    EXPECT_NEAR(id.rotation.angularDistance(Quat::Identity()), 0.0, 1e-9);
    EXPECT_NEAR(id.translation.norm(), 0.0, 1e-9);
    const Vec3 x(rng.normal(), rng.normal(), rng.normal());
    EXPECT_NEAR((p.inverse().to_camera(p.to_camera(x)) - x).norm(), 0.0, 1e-9);
  }
}

TEST(CameraPose, ValidityChecks) {
  CameraPose c = test_camera();
  EXPECT_TRUE(c.valid());
  c.intrinsics.fx = 0.0;
  EXPECT_FALSE(c.valid());
}

TEST(Gaussian3D, OpacityInOpenUnitIntervalAndColorClamped) {
  Gaussian3D g;
  for (double l : {-30.0, -1.0, 0.0, 1.0, 30.0}) {
    g.opacity_logit = l;
    EXPECT_GT(g.opacity(), 0.0);
    EXPECT_LE(g.opacity(), 1.0);
  }
  g.color = Vec3(-0.5, 0.5, 1.5);
  EXPECT_EQ(g.clamped_color(), Vec3(0.0, 0.5, 1.0));
}

TEST(Rotation, KeepUnitRenormalizesDrift) {
  Quat q(1.0, 0.01, 0.0, 0.0);
  keep_unit(q);
  EXPECT_NEAR(q.norm(), 1.0, 1e-12);
  for (int i = 0; i < 1000; ++i) {
    q = q * so3_exp(Vec3(1e-3, 2e-3, -1e-3));
    keep_unit(q);
    EXPECT_LE(std::abs(q.norm() - 1.0), 1e-6);
  }
}

TEST(Rotation, LogInvertsExp) {
  RngStream rng(11, RngPurpose::kTestScene);
  for (int i = 0; i < 100; ++i) {
    const Vec3 w = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized() * rng.uniform(0, 3.0);
    EXPECT_NEAR((so3_log(so3_exp(w)) - w).norm(), 0.0, 1e-10);
  }
}

TEST(Scene, IdsMustMatchIndex) {
  Gaussian3D g;
  g.id = 3;
  EXPECT_THROW(Scene(std::vector<Gaussian3D>{g}), std::invalid_argument);
}

TEST(SceneIo, RoundTripIsExact) {
  RngStream rng(12, RngPurpose::kTestScene);
  const Scene scene = testing::random_scene(rng, test_camera(), {.gaussians = 30});
  std::stringstream ss;
  write_scene(ss, scene);
  const Scene back = read_scene(ss);
  ASSERT_EQ(back.size(), scene.size());
  for (std::size_t i = 0; i < scene.size(); ++i) {
    EXPECT_EQ(back[i].id, scene[i].id);
    EXPECT_EQ(back[i].mean_world, scene[i].mean_world);
    EXPECT_EQ(back[i].rotation.coeffs(), scene[i].rotation.coeffs());
    EXPECT_EQ(back[i].log_scale, scene[i].log_scale);
    EXPECT_EQ(back[i].opacity_logit, scene[i].opacity_logit);
    EXPECT_EQ(back[i].color, scene[i].color);
  }
}

TEST(SceneIo, RejectsMalformedInput) {
  std::stringstream bad("not a scene\n");
  EXPECT_ANY_THROW(read_scene(bad));
  std::stringstream truncated("2 1\n0 0 0 1 1 0 0 0 0 0 0 0 0.5 0.5 0.5\n");
  EXPECT_ANY_THROW(read_scene(truncated));
}

TEST(Philox, KnownAnswerVectors) {
  const PhiloxCounter zero = philox4x64({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(zero[0], 0x16554d9eca36314cULL);
  EXPECT_EQ(zero[1], 0xdb20fe9d672d0fdcULL);
  EXPECT_EQ(zero[2], 0xd7e772cee186176bULL);
  EXPECT_EQ(zero[3], 0x7e68b68aec7ba23bULL);
  const PhiloxCounter other = philox4x64({7, 8, 9, 10}, {123, 5});
  EXPECT_EQ(other[0], 0xe2463cc6fb8f571aULL);
  EXPECT_EQ(other[1], 0xa1a3039a2a37e140ULL);
  EXPECT_EQ(other[2], 0x18d0ee0bc283154dULL);
  EXPECT_EQ(other[3], 0x7f347c22ce062e0fULL);
}

TEST(CounterRng, PurposesAreIndependentStreams) {
  const CounterRng a(1, RngPurpose::kTrackingSampler), b(1, RngPurpose::kMappingSampler);
  int same = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) same += a.bits(i) == b.bits(i);
  EXPECT_EQ(same, 0);
  EXPECT_EQ(a.bits(42, 1), CounterRng(1, RngPurpose::kTrackingSampler).bits(42, 1));
}

TEST(CounterRng, UniformAndBelowRanges) {
  const CounterRng r(2, RngPurpose::kTestScene);
  double mean = 0.0;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    const double u = r.uniform(i);
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(r.below(7, i), 7u);
    mean += u / 20000.0;
  }
  EXPECT_NEAR(mean, 0.5, 0.01);
}

TEST(RngStream, NormalMoments) {
  RngStream s(3, RngPurpose::kTestScene);
  double m = 0.0, v = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double x = s.normal();
    m += x / n;
    v += x * x / n;
  }
  EXPECT_NEAR(m, 0.0, 0.02);
  EXPECT_NEAR(v, 1.0, 0.03);
}

}  // namespace
}  // namespace sgslam
