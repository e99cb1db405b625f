// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "scenes.hpp"

#include "sgslam/cli/commands.hpp"
#include "sgslam/cli/run_config.hpp"

#include "json.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

namespace sgslam {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json read_json(const fs::path& p) {
  std::ifstream is(p);
  return json::parse(is);
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

TEST(Cli, NoArgumentsIsUsageError) { EXPECT_EQ(cli_dispatch(std::vector<std::string>{}), kExitUsage); }

TEST(Cli, UnknownFlagIsUsageError) {
  const auto dir = testing::scratch_dir("cli_unknown");
  EXPECT_EQ(cli_dispatch({"bench", "--no-such-flag", "--out", dir.string()}), kExitUsage);
  EXPECT_EQ(cli_dispatch({"teleport"}), kExitUsage);
}

TEST(Cli, HelpAndVersionSucceed) {
  EXPECT_EQ(cli_dispatch({"--help"}), kExitOk);
  EXPECT_EQ(cli_dispatch({"--version"}), kExitOk);
}

TEST(Cli, BenchReportsTwoFiftySix) {
  const auto dir = testing::scratch_dir("cli_bench");
  ASSERT_EQ(cli_dispatch({"bench", "--wt", "16", "--out", dir.string()}), kExitOk);
  const json w = read_json(dir / "workload.json");
  EXPECT_EQ(w["pixel_reduction"].get<double>(), 256.0);
  EXPECT_TRUE(w["integrated_equals_alpha_passing"].get<bool>());
  const json m = read_json(dir / "bench.manifest.json");
  EXPECT_EQ(m["command"], "bench");
  EXPECT_EQ(m["version"], kVersion);
  EXPECT_EQ(m["seed"], 0);
  EXPECT_EQ(m["config"]["wt"], 16);
}

TEST(Cli, GradcheckSeedSeven) {
  const auto dir = testing::scratch_dir("cli_gradcheck");
  ASSERT_EQ(cli_dispatch({"gradcheck", "--seed", "7", "--out", dir.string()}), kExitOk);
  const json g = read_json(dir / "gradcheck.json");
  EXPECT_LT(g["max_rel_error"].get<double>(), 1e-4);
  EXPECT_TRUE(fs::exists(dir / "gradcheck.manifest.json"));
}

TEST(Cli, ConfigFileThenFlagsOverride) {
  const auto dir = testing::scratch_dir("cli_config");
  {
    std::ofstream os(dir / "cfg.json");
    os << R"({"wt": 8, "gaussians": 20, "sm": 3})";  // sm belongs to other subcommands
  }
  ASSERT_EQ(cli_dispatch({"bench", "--config", (dir / "cfg.json").string(), "--out", dir.string()}), kExitOk);
  EXPECT_EQ(read_json(dir / "workload.json")["pixel_reduction"].get<double>(), 64.0);
  EXPECT_EQ(read_json(dir / "bench.manifest.json")["config"]["gaussians"], 20);
  ASSERT_EQ(cli_dispatch({"bench", "--config", (dir / "cfg.json").string(), "--wt", "4", "--out",
                          dir.string()}),
            kExitOk);
  EXPECT_EQ(read_json(dir / "workload.json")["pixel_reduction"].get<double>(), 16.0);
}

TEST(Cli, UnknownConfigKeyIsUsageError) {
  const auto dir = testing::scratch_dir("cli_badconfig");
  {
    std::ofstream os(dir / "cfg.json");
    os << R"({"warp_speed": 9})";
  }
  EXPECT_EQ(cli_dispatch({"bench", "--config", (dir / "cfg.json").string(), "--out", dir.string()}), kExitUsage);
  {
    std::ofstream os(dir / "typed.json");
    os << R"({"wt": "sixteen"})";
  }
  EXPECT_EQ(cli_dispatch({"bench", "--config", (dir / "typed.json").string(), "--out", dir.string()}), kExitUsage);
}

TEST(Cli, InvalidValueIsUsageError) {
  const auto dir = testing::scratch_dir("cli_invalid");
  EXPECT_EQ(cli_dispatch({"bench", "--wt", "0", "--out", dir.string()}), kExitUsage);
  EXPECT_EQ(cli_dispatch({"aggsim", "--scoreboard-entries", "2", "--out", dir.string()}), kExitUsage);
  EXPECT_EQ(cli_dispatch({"track", "--out", dir.string()}), kExitUsage);
}

TEST(Cli, SynthRenderTrackMapPipeline) {
  const auto dir = testing::scratch_dir("cli_pipeline");
  const std::string ds = (dir / "ds").string();
  ASSERT_EQ(cli_dispatch({"synth", "--frames", "3", "--gaussians", "50", "--out", ds}), kExitOk);
  EXPECT_TRUE(fs::exists(dir / "ds" / "0002.rgb.ppm"));
  EXPECT_TRUE(fs::exists(dir / "ds" / "scene.txt"));
  EXPECT_TRUE(fs::exists(dir / "ds" / "synth.manifest.json"));

  const std::string scene = (dir / "ds" / "scene.txt").string();
  ASSERT_EQ(cli_dispatch({"render", "--scene", scene, "--dataset", ds, "--frame", "1", "--out",
                          (dir / "r").string()}),
            kExitOk);
  // Stored frames are 8-bit, so the re-render differs by quantization only.
  EXPECT_GT(read_json(dir / "r" / "render.json")["psnr_db"].get<double>(), 45.0);

  ASSERT_EQ(cli_dispatch({"track", "--scene", scene, "--dataset", ds, "--frame", "2", "--out",
                          (dir / "t").string()}),
            kExitOk);
  EXPECT_LT(read_json(dir / "t" / "track.json")["translation_error_cm"].get<double>(), 1.0);

  ASSERT_EQ(cli_dispatch({"map", "--dataset", ds, "--frame", "0", "--out", (dir / "m").string()}), kExitOk);
  const json m = read_json(dir / "m" / "map.json");
  EXPECT_EQ(m["unseen_fraction_before"].get<double>(), 1.0);
  EXPECT_LE(m["unseen_fraction_after"].get<double>(), 0.1);
}

TEST(Cli, AggsimReplaysBenchTrace) {
  const auto dir = testing::scratch_dir("cli_aggsim");
  ASSERT_EQ(cli_dispatch({"bench", "--wt", "4", "--trace", "trace.bin", "--out", dir.string()}), kExitOk);
  ASSERT_EQ(cli_dispatch({"aggsim", "--trace", (dir / "trace.bin").string(), "--out", dir.string()}), kExitOk);
  const json a = read_json(dir / "aggsim.json");
  EXPECT_LE(a["max_rel_diff_vs_sequential"].get<double>(), 1e-9);
  EXPECT_GT(a["stats"]["tuples"].get<int>(), 0);
}

TEST(Cli, SlamDeterminismIsByteIdentical) {
  const auto dir = testing::scratch_dir("cli_slam");
  const std::string ds = (dir / "ds").string();
  ASSERT_EQ(cli_dispatch({"synth", "--frames", "5", "--gaussians", "40", "--out", ds}), kExitOk);
  for (const char* run : {"a", "b"})
    ASSERT_EQ(cli_dispatch({"slam", "--dataset", ds, "--st", "10", "--sm", "10", "--determinism", "--threads",
                            "2", "--out", (dir / run).string()}),
              kExitOk);
  EXPECT_EQ(read_file(dir / "a" / "trajectory.txt"), read_file(dir / "b" / "trajectory.txt"));
  EXPECT_EQ(read_file(dir / "a" / "metrics.json"), read_file(dir / "b" / "metrics.json"));
  const json m = read_json(dir / "a" / "metrics.json");
  EXPECT_EQ(m["wall_time_s"].get<double>(), 0.0);
  EXPECT_EQ(m["map_updates"], 2);
  EXPECT_EQ(read_file(dir / "a" / "events.txt"), "track 0\nmap 0\ntrack 1\ntrack 2\ntrack 3\ntrack 4\nmap 4\n");
}

TEST(RunConfig, DefaultsResolveWithoutFile) {
  const RunConfig c;
  const SlamConfig s = to_slam_config(c);
  EXPECT_EQ(s.tracking_tile, 16);
  EXPECT_EQ(s.tracking_iters, 40);
  EXPECT_EQ(s.mapping_iters, 60);
  EXPECT_EQ(to_agg_config(c).batch, 4);
  EXPECT_EQ(to_synth_config(c).gaussians, 100);
}

TEST(RunConfig, DeterminismForcesOrderedAggregation) {
  RunConfig c;
  c.threads = 4;
  EXPECT_EQ(to_slam_config(c).aggregation, AggregationMode::kConcurrent);
  c.determinism = true;
  EXPECT_EQ(to_slam_config(c).aggregation, AggregationMode::kDeterministic);
}

}  // namespace
}  // namespace sgslam
