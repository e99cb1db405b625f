// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace sgslam {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

/// Runs one subcommand: synth, render, track, map, slam, gradcheck, bench, aggsim.
int cli_dispatch(int argc, const char* const* argv);

/// Same as above; `args` excludes the program name.
int cli_dispatch(const std::vector<std::string>& args);

}  // namespace sgslam
