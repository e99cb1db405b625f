// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/pipemodel/aggregation_unit.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <list>
#include <map>
#include <unordered_map>

namespace sgslam {
namespace {

class LruCache {
 public:
  explicit LruCache(std::size_t capacity) : capacity_(capacity) {}

  /// True on hit. A miss inserts the line and may evict the least recent one.
  bool access(std::int64_t id, std::uint64_t& evictions) {
    auto it = where_.find(id);
    if (it != where_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      return true;
    }
    if (order_.size() == capacity_) {
      where_.erase(order_.back());
      order_.pop_back();
      ++evictions;
    }
    order_.push_front(id);
    where_[id] = order_.begin();
    return false;
  }

  std::size_t size() const { return order_.size(); }

 private:
  std::size_t capacity_;
  std::list<std::int64_t> order_;
  std::unordered_map<std::int64_t, std::list<std::int64_t>::iterator> where_;
};

using Record = std::array<double, kSplatGradientFloats>;

}  // namespace

void AggUnitConfig::validate() const {
  if (batch < 1) throw AggConfigError("batch size must be >= 1");
  const auto n = static_cast<std::size_t>(batch);
  if (cache_entries < n) throw AggConfigError("cache capacity must be >= batch size");
  if (scoreboard_entries < n) throw AggConfigError("scoreboard capacity must be >= batch size");
  if (load_latency < 1) throw AggConfigError("load latency must be >= 1");
}

nlohmann::json to_json(const AggStats& s) {
  return {{"batches", s.batches},
          {"entries", s.entries},
          {"tuples", s.tuples},
          {"merges", s.merges},
          {"cache_hits", s.cache_hits},
          {"cache_misses", s.cache_misses},
          {"writebacks", s.writebacks},
          {"stall_ticks", s.stall_ticks},
          {"total_ticks", s.total_ticks},
          {"scoreboard_peak", s.scoreboard_peak},
          {"bytes_offchip", s.bytes_offchip}};
}

AggSimResult simulate_aggregation(std::span<const PixelGradient> stream, std::size_t scene_size,
                                  const AggUnitConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.batch);
  std::size_t max_contrib = 0;
  for (const auto& e : stream) max_contrib = std::max(max_contrib, e.partials.size());
  if (cfg.scoreboard_entries < n * max_contrib)
    throw AggConfigError("scoreboard holds " + std::to_string(cfg.scoreboard_entries) +
                         " entries but a batch may need " + std::to_string(n * max_contrib));

  AggSimResult out;
  AggStats& st = out.stats;
  std::vector<Record> acc(scene_size, Record{});
  out.sums.touches.assign(scene_size, 0);

  // Functional pass: per-batch merge, then accumulate in id order.
  std::vector<std::map<std::int64_t, Record>> unions;
  for (std::size_t b0 = 0; b0 < stream.size(); b0 += n) {
    std::map<std::int64_t, Record> merged;
    const std::size_t b1 = std::min(stream.size(), b0 + n);
    for (std::size_t e = b0; e < b1; ++e) {
      for (const auto& c : stream[e].partials) {
        if (c.gaussian_id < 0 || static_cast<std::size_t>(c.gaussian_id) >= scene_size)
          throw std::out_of_range("trace refers to a Gaussian outside the scene");
        const Record v = SplatGradient::flatten(c);
        auto [it, fresh] = merged.try_emplace(c.gaussian_id, v);
        if (!fresh) {
          for (int k = 0; k < kSplatGradientFloats; ++k) it->second[k] += v[k];
          ++st.merges;
        }
        ++st.tuples;
        ++out.sums.touches[c.gaussian_id];
      }
    }
    st.entries += b1 - b0;
    for (const auto& [id, v] : merged)
      for (int k = 0; k < kSplatGradientFloats; ++k) acc[id][k] += v[k];
    unions.push_back(std::move(merged));
  }
  st.batches = unions.size();

  // Timing pass.
  LruCache cache(cfg.cache_entries);
  std::uint64_t start = 0;
  std::uint64_t done_prev = 0;
  std::uint64_t work = 0;
  for (std::size_t b = 0; b < unions.size(); ++b) {
    const auto& u = unions[b];
    std::uint64_t misses = 0;
    for (const auto& [id, _] : u) {
      if (cache.access(id, st.writebacks)) ++st.cache_hits;
      else ++misses;
    }
    st.cache_misses += misses;
    const std::uint64_t ready = start + (misses > 0 ? cfg.load_latency + misses - 1 : 0);
    const std::uint64_t begin = std::max(ready, done_prev);
    const std::uint64_t ticks = (u.size() + n - 1) / n;
    const std::uint64_t done = begin + ticks;
    work += ticks;

    std::uint64_t occupancy = u.size();
    if (b + 1 < unions.size()) {
      const std::uint64_t both = u.size() + unions[b + 1].size();
      if (both <= cfg.scoreboard_entries) {
        occupancy = both;
        start = start + 1;
      } else {
        start = done;
      }
    }
    st.scoreboard_peak = std::max(st.scoreboard_peak, occupancy);
    done_prev = done;
  }
  st.writebacks += cache.size();
  st.total_ticks = done_prev;
  st.stall_ticks = done_prev - work;
  st.bytes_offchip = (st.cache_misses + st.writebacks) * cfg.record_bytes;

  out.sums.gaussians.resize(scene_size);
  for (std::size_t i = 0; i < scene_size; ++i) out.sums.gaussians[i] = SplatGradient::from_flat(acc[i]);
  return out;
}

namespace {

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw std::runtime_error("truncated gradient trace");
  return v;
}

constexpr char kTraceMagic[4] = {'S', 'G', 'T', 'R'};

}  // namespace

void write_gradient_trace(std::ostream& os, std::span<const PixelGradient> stream) {
  os.write(kTraceMagic, 4);
  put<std::uint32_t>(os, kTraceVersion);
  put<std::uint32_t>(os, kSplatGradientFloats);
  for (const auto& e : stream) {
    for (const auto& c : e.partials) {
      put<std::int32_t>(os, e.pixel.x);
      put<std::int32_t>(os, e.pixel.y);
      put<std::uint32_t>(os, static_cast<std::uint32_t>(c.gaussian_id));
      for (double v : SplatGradient::flatten(c)) put<float>(os, static_cast<float>(v));
    }
  }
  if (!os) throw std::runtime_error("failed to write gradient trace");
}

std::vector<PixelGradient> read_gradient_trace(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kTraceMagic, 4) != 0)
    throw std::runtime_error("not a gradient trace");
  if (get<std::uint32_t>(is) != kTraceVersion)
    throw std::runtime_error("unsupported gradient trace version");
  const auto floats = get<std::uint32_t>(is);
  if (floats != kSplatGradientFloats) throw std::runtime_error("unexpected gradient record width");

  std::vector<PixelGradient> out;
  while (is.peek() != std::char_traits<char>::eof()) {
    const PixelCoord p{get<std::int32_t>(is), get<std::int32_t>(is)};
    const auto id = get<std::uint32_t>(is);
    std::array<double, kSplatGradientFloats> v{};
    for (auto& x : v) x = get<float>(is);
    if (out.empty() || !(out.back().pixel == p)) {
      out.emplace_back();
      out.back().pixel = p;
    }
    const SplatGradient g = SplatGradient::from_flat(v);
    ContributorGradient c;
    c.gaussian_id = id;
    c.dL_dalpha = g.dL_dalpha;
    c.dL_dopacity_logit = g.dL_dopacity_logit;
    c.dL_dcolor = g.dL_dcolor;
    c.dL_dmean_px = g.dL_dmean_px;
    c.dL_dconic = g.dL_dconic;
    c.dL_ddepth = g.dL_ddepth;
    out.back().partials.push_back(c);
  }
  return out;
}

void save_gradient_trace(const std::string& path, std::span<const PixelGradient> stream) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_gradient_trace(os, stream);
}

std::vector<PixelGradient> load_gradient_trace(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_gradient_trace(is);
}

}  // namespace sgslam
