// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/pipemodel/workload.hpp"

#include "json.hpp"

#include <limits>

namespace sgslam {
namespace {

double ratio(std::uint64_t dense, std::uint64_t sparse) {
  if (dense == sparse) return 1.0;
  if (sparse == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(dense) / static_cast<double>(sparse);
}

}  // namespace

WorkloadTrace& WorkloadTrace::operator+=(const WorkloadTrace& o) {
  rendered_pixels += o.rendered_pixels;
  projected_gaussians += o.projected_gaussians;
  alpha_checks += o.alpha_checks;
  alpha_passing_pairs += o.alpha_passing_pairs;
  integrated_pairs += o.integrated_pairs;
  sort_keys += o.sort_keys;
  gradient_partials += o.gradient_partials;
  aggregation_conflicts += o.aggregation_conflicts;
  bytes_offchip_model += o.bytes_offchip_model;
  preemptive_alpha_check = preemptive_alpha_check || o.preemptive_alpha_check;
  return *this;
}

nlohmann::json to_json(const WorkloadTrace& t) {
  return {{"rendered_pixels", t.rendered_pixels},
          {"projected_gaussians", t.projected_gaussians},
          {"alpha_checks", t.alpha_checks},
          {"alpha_passing_pairs", t.alpha_passing_pairs},
          {"integrated_pairs", t.integrated_pairs},
          {"sort_keys", t.sort_keys},
          {"gradient_partials", t.gradient_partials},
          {"aggregation_conflicts", t.aggregation_conflicts},
          {"bytes_offchip_model", t.bytes_offchip_model},
          {"preemptive_alpha_check", t.preemptive_alpha_check}};
}

std::map<std::string, double> stage_shares(const WorkloadTrace& t) {
  // One modeled op per projected splat, alpha evaluation, sort key, composited
  // pair and gradient partial. Tile-based pipelines re-run alpha-checking in
  // both rasterization and reverse rasterization.
  const double checks = static_cast<double>(t.alpha_checks);
  std::map<std::string, double> ops{
      {"projection", static_cast<double>(t.projected_gaussians) +
                         (t.preemptive_alpha_check ? checks : 0.0)},
      {"sorting", static_cast<double>(t.sort_keys)},
      {"rasterization", static_cast<double>(t.integrated_pairs) +
                            (t.preemptive_alpha_check ? 0.0 : checks)},
      {"reverse_rasterization", static_cast<double>(t.gradient_partials) +
                                    (t.preemptive_alpha_check ? 0.0 : checks)},
      {"aggregation", static_cast<double>(t.gradient_partials)},
  };
  double total = 0.0;
  for (const auto& [_, v] : ops) total += v;
  if (total > 0.0)
    for (auto& [_, v] : ops) v /= total;
  return ops;
}

WorkloadReport count_workload(const WorkloadTrace& sparse, const WorkloadTrace& dense) {
  WorkloadReport r;
  r.pixel_reduction = ratio(dense.rendered_pixels, sparse.rendered_pixels);
  r.alpha_check_reduction = ratio(dense.alpha_checks, sparse.alpha_checks);
  r.pair_reduction = ratio(dense.integrated_pairs, sparse.integrated_pairs);
  r.sort_key_reduction = ratio(dense.sort_keys, sparse.sort_keys);
  r.gradient_partial_reduction = ratio(dense.gradient_partials, sparse.gradient_partials);
  r.sparse_stage_share = stage_shares(sparse);
  r.dense_stage_share = stage_shares(dense);
  r.sparse = sparse;
  r.dense = dense;
  return r;
}

nlohmann::json to_json(const WorkloadReport& r) {
  return {{"pixel_reduction", r.pixel_reduction},
          {"alpha_check_reduction", r.alpha_check_reduction},
          {"pair_reduction", r.pair_reduction},
          {"sort_key_reduction", r.sort_key_reduction},
          {"gradient_partial_reduction", r.gradient_partial_reduction},
          {"sparse_stage_share", r.sparse_stage_share},
          {"dense_stage_share", r.dense_stage_share},
          {"sparse", to_json(r.sparse)},
          {"dense", to_json(r.dense)}};
}

}  // namespace sgslam
