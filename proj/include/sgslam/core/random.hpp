// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>

namespace sgslam {

/// Philox4x64-10 block: a keyed bijection over 256-bit counters.
using PhiloxCounter = std::array<std::uint64_t, 4>;
using PhiloxKey = std::array<std::uint64_t, 2>;

PhiloxCounter philox4x64(PhiloxCounter counter, PhiloxKey key);

/// Independent random streams. Each (seed, purpose) pair gets its own key, so
/// adding a consumer never shifts the numbers another consumer sees.
enum class RngPurpose : std::uint64_t {
  kTrackingSampler = 1,
  kMappingSampler = 2,
  kSceneSynthesis = 3,
  kTrajectoryNoise = 4,
  kTestScene = 5,
  kBenchmark = 6,
  kAggregationStream = 7,
};

/// Stateless counter-based generator: every draw is a pure function of
/// (seed, purpose, counter words).
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, RngPurpose purpose)
      : key_{seed, static_cast<std::uint64_t>(purpose)} {}

  std::uint64_t bits(std::uint64_t c0, std::uint64_t c1 = 0, std::uint64_t c2 = 0,
                     std::uint64_t c3 = 0) const {
    return philox4x64({c0, c1, c2, c3}, key_)[0];
  }

  /// Uniform in the open interval (0, 1).
  double uniform(std::uint64_t c0, std::uint64_t c1 = 0, std::uint64_t c2 = 0,
                 std::uint64_t c3 = 0) const {
    return to_open_unit(bits(c0, c1, c2, c3));
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n, std::uint64_t c0, std::uint64_t c1 = 0,
                      std::uint64_t c2 = 0, std::uint64_t c3 = 0) const {
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(bits(c0, c1, c2, c3)) * static_cast<unsigned __int128>(n);
    return static_cast<std::uint64_t>(wide >> 64);
  }

  static double to_open_unit(std::uint64_t x) {
    return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
  }

 private:
  PhiloxKey key_;
};

/// Sequential view over a CounterRng stream, for code that just wants "the next number".
class RngStream {
 public:
  RngStream(std::uint64_t seed, RngPurpose purpose, std::uint64_t substream = 0)
      : rng_(seed, purpose), substream_(substream) {}

  double uniform() { return rng_.uniform(substream_, next_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t below(std::uint64_t n) { return rng_.below(n, substream_, next_++); }
  /// Standard normal via Box-Muller.
  double normal();

 private:
  CounterRng rng_;
  std::uint64_t substream_;
  std::uint64_t next_ = 0;
};

}  // namespace sgslam
