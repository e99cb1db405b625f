// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "sgslam/autodiff/gradients.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgslam {

/// Bytes of one accumulated-gradient record (float32 per slot).
inline constexpr std::size_t kGradientRecordBytes = kSplatGradientFloats * sizeof(float);
inline constexpr std::size_t kDefaultCacheBytes = 32 * 1024;
inline constexpr std::size_t kDefaultScoreboardBytes = 8 * 1024;

struct AggUnitConfig {
  int batch = 4;  // pixel entries consumed per step
  std::size_t cache_entries = kDefaultCacheBytes / kGradientRecordBytes;
  std::size_t scoreboard_entries = kDefaultScoreboardBytes / kGradientRecordBytes;
  int load_latency = 8;  // ticks from issue to the first cache line arriving
  std::size_t record_bytes = kGradientRecordBytes;

  /// Throws AggConfigError on n < 1, capacities < n or a non-positive latency.
  void validate() const;
};

class AggConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct AggStats {
  std::uint64_t batches = 0;
  std::uint64_t entries = 0;  // pixel entries consumed
  std::uint64_t tuples = 0;   // (id, partial) pairs consumed
  std::uint64_t merges = 0;   // tuples folded into another with the same id inside a batch
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::uint64_t writebacks = 0;  // evictions plus the final flush
  std::uint64_t stall_ticks = 0;
  std::uint64_t total_ticks = 0;
  std::uint64_t scoreboard_peak = 0;
  std::uint64_t bytes_offchip = 0;
};

nlohmann::json to_json(const AggStats& s);

struct AggSimResult {
  ScreenGradientBuffer sums;
  AggStats stats;
};

/// Functional and timing model of the aggregation unit.
///
/// Batches of cfg.batch pixel entries form an id union U_b; duplicates are
/// merged. The union is looked up in an LRU Gaussian cache; m_b misses are
/// loaded back to back, ready at start_b + L + m_b - 1. Accumulation of U_b
/// starts once its lines are ready and batch b-1 has drained, and takes
/// ceil(|U_b| / n) ticks. Batch b+1 enters one tick after b only when the
/// scoreboard holds both unions; otherwise it waits for b to finish.
AggSimResult simulate_aggregation(std::span<const PixelGradient> stream, std::size_t scene_size,
                                  const AggUnitConfig& cfg);

/// Binary trace: "SGTR", uint32 version, uint32 floats per record, then per
/// record int32 x, int32 y, uint32 gaussian id, float32[floats].
inline constexpr std::uint32_t kTraceVersion = 1;
void write_gradient_trace(std::ostream& os, std::span<const PixelGradient> stream);
std::vector<PixelGradient> read_gradient_trace(std::istream& is);
void save_gradient_trace(const std::string& path, std::span<const PixelGradient> stream);
std::vector<PixelGradient> load_gradient_trace(const std::string& path);

}  // namespace sgslam
