// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sgslam/core/math.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgslam {

struct PixelCoord {
  int x = 0;
  int y = 0;

  friend bool operator==(const PixelCoord&, const PixelCoord&) = default;
};

/// Row-major ordering (y first, then x).
inline bool row_major_less(const PixelCoord& a, const PixelCoord& b) {
  return a.y != b.y ? a.y < b.y : a.x < b.x;
}

/// One trainable scene primitive.
struct Gaussian3D {
  std::int64_t id = 0;
  Vec3 mean_world = Vec3::Zero();
  Quat rotation = Quat::Identity();
  Vec3 log_scale = Vec3::Zero();
  double opacity_logit = 0.0;
  Vec3 color = Vec3::Zero();

  double opacity() const { return sigmoid(opacity_logit); }
  Vec3 clamped_color() const { return color.cwiseMax(0.0).cwiseMin(1.0); }
};

struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
};

/// World-to-camera rigid transform plus pinhole intrinsics: p_cam = R * p_world + t.
struct CameraPose {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();
  Intrinsics intrinsics;
  int width = 1;
  int height = 1;

  Mat3 rotation_matrix() const { return rotation.toRotationMatrix(); }
  Vec3 to_camera(const Vec3& p_world) const { return rotation * p_world + translation; }
  /// Camera center in world coordinates.
  Vec3 center() const { return -(rotation.conjugate() * translation); }

  /// Same intrinsics, inverse rigid transform (camera-to-world).
  CameraPose inverse() const {
    CameraPose inv = *this;
    inv.rotation = rotation.conjugate();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }

  /// Rigid composition: (a * b) applies b first, then a. Intrinsics come from a.
  friend CameraPose operator*(const CameraPose& a, const CameraPose& b) {
    CameraPose c = a;
    c.rotation = (a.rotation * b.rotation).normalized();
    c.translation = a.rotation * b.translation + a.translation;
    return c;
  }

  bool valid() const {
    return intrinsics.fx > 0.0 && intrinsics.fy > 0.0 && width >= 1 && height >= 1;
  }
};

/// Inclusive integer pixel rectangle.
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = -1;
  int y1 = -1;

  bool empty() const { return x1 < x0 || y1 < y0; }
  bool contains(int x, int y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

/// A Gaussian projected into one camera.
struct Splat2D {
  std::int64_t source_id = 0;
  std::size_t source_index = 0;  // position in the scene vector
  Vec2 mean_px = Vec2::Zero();
  Mat2 conic = Mat2::Identity();  // inverse 2D covariance
  double depth = 0.0;
  PixelRect bbox;
  double opacity = 0.0;
  Vec3 color = Vec3::Zero();
};

/// Ordered Gaussian container; ids are assigned densely on append so id == index.
class Scene {
 public:
  Scene() = default;
  explicit Scene(std::vector<Gaussian3D> gaussians) : gaussians_(std::move(gaussians)) {
    for (std::size_t i = 0; i < gaussians_.size(); ++i) {
      if (gaussians_[i].id != static_cast<std::int64_t>(i))
        throw std::invalid_argument("scene ids must equal their index");
    }
  }

  std::size_t size() const { return gaussians_.size(); }
  bool empty() const { return gaussians_.empty(); }
  const Gaussian3D& operator[](std::size_t i) const { return gaussians_[i]; }
  Gaussian3D& operator[](std::size_t i) { return gaussians_[i]; }
  const std::vector<Gaussian3D>& gaussians() const { return gaussians_; }
  std::vector<Gaussian3D>& gaussians() { return gaussians_; }

  Gaussian3D& append(Gaussian3D g) {
    g.id = static_cast<std::int64_t>(gaussians_.size());
    gaussians_.push_back(std::move(g));
    return gaussians_.back();
  }

  auto begin() const { return gaussians_.begin(); }
  auto end() const { return gaussians_.end(); }

 private:
  std::vector<Gaussian3D> gaussians_;
};

}  // namespace sgslam
