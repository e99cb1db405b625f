// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/slam/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sgslam {

namespace fs = std::filesystem;

void Trajectory::push_back(int frame, const CameraPose& pose) {
  if (!entries_.empty() && frame <= entries_.back().frame)
    throw std::invalid_argument("trajectory frame indices must strictly increase");
  entries_.push_back({frame, pose});
}

void write_trajectory(std::ostream& os, const Trajectory& t) {
  char buf[256];
  for (const auto& e : t) {
    const CameraPose c2w = e.pose.inverse();
    const Quat& q = c2w.rotation;
    const Vec3& p = c2w.translation;
    std::snprintf(buf, sizeof buf, "%d %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", e.frame, p.x(),
                  p.y(), p.z(), q.x(), q.y(), q.z(), q.w());
    os << buf;
  }
}

Trajectory read_trajectory(std::istream& is, const CameraPose& camera) {
  Trajectory t;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int idx;
    double tx, ty, tz, qx, qy, qz, qw;
    if (!(ls >> idx >> tx >> ty >> tz >> qx >> qy >> qz >> qw))
      throw std::runtime_error("malformed trajectory line " + std::to_string(line_no));
    CameraPose c2w = camera;
    c2w.rotation = Quat(qw, qx, qy, qz).normalized();
    c2w.translation = Vec3(tx, ty, tz);
    t.push_back(idx, c2w.inverse());
  }
  return t;
}

CameraPose Dataset::camera() const {
  CameraPose c;
  c.intrinsics = intrinsics;
  c.width = width;
  c.height = height;
  return c;
}

std::string frame_stem(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d", index);
  return buf;
}

Dataset load_dataset(const std::string& dir, int max_frames) {
  const fs::path root(dir);
  Dataset ds;
  {
    std::ifstream cam(root / "camera.txt");
    if (!cam) throw std::runtime_error("missing camera.txt in " + dir);
    if (!(cam >> ds.intrinsics.fx >> ds.intrinsics.fy >> ds.intrinsics.cx >> ds.intrinsics.cy >>
          ds.width >> ds.height))
      throw std::runtime_error("malformed camera.txt");
  }
  for (int i = 0; max_frames < 0 || i < max_frames; ++i) {
    const fs::path rgb = root / (frame_stem(i) + ".rgb.ppm");
    if (!fs::exists(rgb)) break;
    Frame f;
    f.index = i;
    f.color = read_ppm(rgb.string());
    f.depth = read_depth_f32((root / (frame_stem(i) + ".depth.f32")).string());
    if (f.color.width != ds.width || f.color.height != ds.height || f.depth.width != ds.width ||
        f.depth.height != ds.height)
      throw std::runtime_error("frame " + std::to_string(i) + " does not match camera.txt size");
    ds.frames.push_back(std::move(f));
  }
  if (ds.frames.empty()) throw std::runtime_error("no frames found in " + dir);
  std::ifstream gt(root / "groundtruth.txt");
  if (gt) {
    Trajectory all = read_trajectory(gt, ds.camera());
    for (const auto& e : all)
      if (e.frame < static_cast<int>(ds.frames.size())) ds.ground_truth.push_back(e.frame, e.pose);
  }
  return ds;
}

void save_dataset(const std::string& dir, const Dataset& ds) {
  const fs::path root(dir);
  fs::create_directories(root);
  {
    std::ofstream cam(root / "camera.txt");
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %d %d\n", ds.intrinsics.fx,
                  ds.intrinsics.fy, ds.intrinsics.cx, ds.intrinsics.cy, ds.width, ds.height);
    cam << buf;
  }
  for (const auto& f : ds.frames) {
    write_ppm((root / (frame_stem(f.index) + ".rgb.ppm")).string(), f.color);
    write_depth_f32((root / (frame_stem(f.index) + ".depth.f32")).string(), f.depth);
  }
  if (!ds.ground_truth.empty()) {
    std::ofstream gt(root / "groundtruth.txt");
    write_trajectory(gt, ds.ground_truth);
  }
}

}  // namespace sgslam
