// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sgslam/core/types.hpp"
#include "sgslam/renderer/image.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace sgslam {

/// One RGB-D observation. Depth is in meters; 0 marks a missing value.
struct Frame {
  int index = 0;
  ImageRGB color;
  ScalarGrid depth;
};

struct TrajectoryEntry {
  int frame = 0;
  CameraPose pose;  // world-to-camera
};

/// Camera poses keyed by strictly increasing frame index.
class Trajectory {
 public:
  void push_back(int frame, const CameraPose& pose);
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const TrajectoryEntry& operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<TrajectoryEntry>& entries() const { return entries_; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::vector<TrajectoryEntry> entries_;
};

/// Lines `idx tx ty tz qx qy qz qw` holding the camera-to-world transform.
void write_trajectory(std::ostream& os, const Trajectory& t);
/// Poses get the intrinsics and frame size of `camera`.
Trajectory read_trajectory(std::istream& is, const CameraPose& camera);

struct Dataset {
  Intrinsics intrinsics;
  int width = 0;
  int height = 0;
  std::vector<Frame> frames;
  Trajectory ground_truth;  // empty when unknown

  /// Identity pose with this dataset's intrinsics and size.
  CameraPose camera() const;
};

/// Directory layout: camera.txt (`fx fy cx cy width height`), NNNN.rgb.ppm,
/// NNNN.depth.f32 and an optional groundtruth.txt. Frames are read from 0000
/// until the first missing index; max_frames < 0 reads all of them.
Dataset load_dataset(const std::string& dir, int max_frames = -1);
void save_dataset(const std::string& dir, const Dataset& ds);

std::string frame_stem(int index);

}  // namespace sgslam
