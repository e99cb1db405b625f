// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sgslam/core/types.hpp"

#include <iosfwd>
#include <string>

namespace sgslam {

inline constexpr int kSceneFormatVersion = 1;

/// Text scene format. Header: `<count> <version>`. One record per line:
/// `id mx my mz qw qx qy qz ls0 ls1 ls2 op r g b`, where op is the opacity logit.
void write_scene(std::ostream& os, const Scene& scene);
Scene read_scene(std::istream& is);

void save_scene(const std::string& path, const Scene& scene);
Scene load_scene(const std::string& path);

}  // namespace sgslam
