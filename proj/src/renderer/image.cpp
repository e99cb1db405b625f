// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/renderer/image.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sgslam {
namespace {

void write_i32(std::ofstream& os, std::int32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::int32_t read_i32(std::ifstream& is) {
  std::int32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

std::string next_token(std::istream& is) {
  std::string tok;
  char c;
  while (is.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(is, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

}  // namespace

std::uint8_t to_8bit(double v) {
  const double c = std::min(1.0, std::max(0.0, v));
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

void write_ppm(const std::string& path, const ImageRGB& image) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  std::vector<std::uint8_t> bytes;
  bytes.reserve(image.pixels.size() * 3);
  for (const auto& p : image.pixels)
    for (int c = 0; c < 3; ++c) bytes.push_back(to_8bit(p[c]));
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ImageRGB read_ppm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  if (next_token(is) != "P6") throw std::runtime_error(path + ": not a binary PPM");
  const int w = std::stoi(next_token(is));
  const int h = std::stoi(next_token(is));
  const int maxval = std::stoi(next_token(is));
  if (w <= 0 || h <= 0 || maxval != 255) throw std::runtime_error(path + ": unsupported PPM");
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * 3);
  is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!is) throw std::runtime_error(path + ": truncated PPM");
  ImageRGB img(w, h);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    img.pixels[i] = Vec3(bytes[3 * i], bytes[3 * i + 1], bytes[3 * i + 2]) / 255.0;
  return img;
}

void write_f32_grid(const std::string& path, int width, int height, int channels,
                    const std::vector<double>& values) {
  if (values.size() != static_cast<std::size_t>(width) * height * channels)
    throw std::invalid_argument("write_f32_grid: size mismatch");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_i32(os, width);
  write_i32(os, height);
  write_i32(os, channels);
  std::vector<float> f(values.begin(), values.end());
  os.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * 4));
}

void write_f32_grid(const std::string& path, const ScalarGrid& grid) {
  write_f32_grid(path, grid.width, grid.height, 1, grid.values);
}

void write_depth_f32(const std::string& path, const ScalarGrid& depth) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_i32(os, depth.width);
  write_i32(os, depth.height);
  std::vector<float> f(depth.values.begin(), depth.values.end());
  os.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * 4));
}

ScalarGrid read_depth_f32(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  const int w = read_i32(is);
  const int h = read_i32(is);
  if (!is || w <= 0 || h <= 0) throw std::runtime_error(path + ": bad depth header");
  std::vector<float> f(static_cast<std::size_t>(w) * h);
  is.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.size() * 4));
  if (!is) throw std::runtime_error(path + ": truncated depth map");
  ScalarGrid grid(w, h);
  for (std::size_t i = 0; i < f.size(); ++i) grid.values[i] = f[i];
  return grid;
}

}  // namespace sgslam
