// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/pipemodel/lut_exp.hpp"

#include <cmath>
#include <numbers>

namespace sgslam {

const std::array<double, kLutEntries>& lut_exp_table() {
  static const std::array<double, kLutEntries> table = [] {
    std::array<double, kLutEntries> t{};
    for (int k = 0; k < kLutEntries; ++k) t[k] = std::exp2(static_cast<double>(k) / (kLutEntries - 1));
    return t;
  }();
  return table;
}

double lut_exp(double x) {
  if (x >= 0.0) return 1.0;
  if (x < -kLutDomain) return 0.0;
  const auto& table = lut_exp_table();
  const double y = x * std::numbers::log2e;
  const double n = std::floor(y);
  const double pos = (y - n) * (kLutEntries - 1);
  int i = static_cast<int>(pos);
  if (i >= kLutEntries - 1) i = kLutEntries - 2;
  const double frac = pos - i;
  const double mantissa = table[i] + frac * (table[i + 1] - table[i]);
  return std::ldexp(mantissa, static_cast<int>(n));
}

}  // namespace sgslam
