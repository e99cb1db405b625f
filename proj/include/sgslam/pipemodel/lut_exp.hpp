// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

namespace sgslam {

inline constexpr int kLutEntries = 64;
/// Arguments below -kLutDomain evaluate to zero.
inline constexpr double kLutDomain = 12.0;

/// The 64 stored knots: 2^(k/63) for k = 0..63.
const std::array<double, kLutEntries>& lut_exp_table();

/// Lookup-table exponential for non-positive arguments, as a projection unit
/// would evaluate the Gaussian falloff. x is split into x*log2(e) = n + f
/// with integer n and f in [0,1); 2^f is linearly interpolated from the
/// 64-entry table and scaled by 2^n (an exponent shift in hardware).
/// Positive arguments are treated as 0.
double lut_exp(double x);

}  // namespace sgslam
