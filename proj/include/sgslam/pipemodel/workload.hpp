// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "json.hpp"

namespace sgslam {

/// Operation counters gathered while rendering and back-propagating one frame.
struct WorkloadTrace {
  std::uint64_t rendered_pixels = 0;
  std::uint64_t projected_gaussians = 0;  // splats that survived projection
  std::uint64_t alpha_checks = 0;         // alpha evaluations against alpha*
  std::uint64_t alpha_passing_pairs = 0;  // pixel-Gaussian pairs with alpha > alpha*
  std::uint64_t integrated_pairs = 0;     // pairs actually composited
  std::uint64_t sort_keys = 0;
  std::uint64_t gradient_partials = 0;
  std::uint64_t aggregation_conflicts = 0;  // same-Gaussian collisions within a batch
  std::uint64_t bytes_offchip_model = 0;
  /// True when alpha-checking ran at projection (pixel-based pipeline).
  bool preemptive_alpha_check = false;

  WorkloadTrace& operator+=(const WorkloadTrace& o);
};

nlohmann::json to_json(const WorkloadTrace& t);

/// Modeled op counts per pipeline stage, normalized to shares of the total.
std::map<std::string, double> stage_shares(const WorkloadTrace& t);

struct WorkloadReport {
  double pixel_reduction = 1.0;
  double alpha_check_reduction = 1.0;
  double pair_reduction = 1.0;
  double sort_key_reduction = 1.0;
  double gradient_partial_reduction = 1.0;
  std::map<std::string, double> sparse_stage_share;
  std::map<std::string, double> dense_stage_share;
  WorkloadTrace sparse;
  WorkloadTrace dense;
};

/// dense / sparse ratios per counter (1 when both are zero).
WorkloadReport count_workload(const WorkloadTrace& sparse, const WorkloadTrace& dense);

nlohmann::json to_json(const WorkloadReport& r);

}  // namespace sgslam
