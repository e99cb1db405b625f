// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/core/scene_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sgslam {
namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_scene(std::ostream& os, const Scene& scene) {
  os << scene.size() << ' ' << kSceneFormatVersion << '\n';
  for (const auto& g : scene) {
    os << g.id;
    const double fields[] = {g.mean_world.x(), g.mean_world.y(), g.mean_world.z(),
                             g.rotation.w(),   g.rotation.x(),   g.rotation.y(),
                             g.rotation.z(),   g.log_scale.x(),  g.log_scale.y(),
                             g.log_scale.z(),  g.opacity_logit,  g.color.x(),
                             g.color.y(),      g.color.z()};
    for (double f : fields) os << ' ' << fmt17(f);
    os << '\n';
  }
}

Scene read_scene(std::istream& is) {
  std::size_t count = 0;
  int version = 0;
  std::string header;
  if (!std::getline(is, header)) throw std::runtime_error("scene: missing header");
  std::istringstream hs(header);
  if (!(hs >> count >> version)) throw std::runtime_error("scene: malformed header");
  if (version != kSceneFormatVersion)
    throw std::runtime_error("scene: unsupported format version " + std::to_string(version));

  std::vector<Gaussian3D> gaussians;
  gaussians.reserve(count);
  std::string line;
  while (gaussians.size() < count && std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Gaussian3D g;
    double qw, qx, qy, qz;
    if (!(ls >> g.id >> g.mean_world.x() >> g.mean_world.y() >> g.mean_world.z() >> qw >> qx >>
          qy >> qz >> g.log_scale.x() >> g.log_scale.y() >> g.log_scale.z() >> g.opacity_logit >>
          g.color.x() >> g.color.y() >> g.color.z()))
      throw std::runtime_error("scene: malformed record at entry " +
                               std::to_string(gaussians.size()));
    g.rotation = Quat(qw, qx, qy, qz);
    keep_unit(g.rotation);
    gaussians.push_back(g);
  }
  if (gaussians.size() != count) throw std::runtime_error("scene: fewer records than header count");
  return Scene(std::move(gaussians));
}

void save_scene(const std::string& path, const Scene& scene) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_scene(os, scene);
}

Scene load_scene(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return read_scene(is);
}

}  // namespace sgslam
