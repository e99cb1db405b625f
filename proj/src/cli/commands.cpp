// Copyright 2026 The sgslam Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgslam/cli/commands.hpp"

#include "sgslam/autodiff/gradcheck.hpp"
#include "sgslam/autodiff/gradients.hpp"
#include "sgslam/cli/run_config.hpp"
#include "sgslam/cli/synth.hpp"
#include "sgslam/core/random.hpp"
#include "sgslam/core/scene_io.hpp"
#include "sgslam/pipemodel/aggregation_unit.hpp"
#include "sgslam/pipemodel/workload.hpp"
#include "sgslam/sampler/sampler.hpp"
#include "sgslam/slam/dataset.hpp"
#include "sgslam/slam/metrics.hpp"
#include "sgslam/slam/slam.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>

namespace sgslam {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Knob {
  std::string key;
  CLI::Option* option = nullptr;
  std::function<void(const json&)> set;
  std::function<json()> get;
};

struct Command {
  std::string name;
  CLI::App* app = nullptr;
  RunConfig cfg;
  std::vector<Knob> knobs;
  std::function<int(Command&)> run;
  json outputs = json::array();
  json results = json::object();

  template <class T>
  void add(const std::string& key, T& field, const std::string& help) {
    Knob k;
    k.key = key;
    if constexpr (std::is_same_v<T, bool>) {
      k.option = app->add_flag("--" + key, field, help);
    } else {
      k.option = app->add_option("--" + key, field, help)->capture_default_str();
    }
    k.set = [&field](const json& v) { field = v.get<T>(); };
    k.get = [&field] { return json(field); };
    knobs.push_back(std::move(k));
  }

  fs::path out_path(const std::string& file) {
    outputs.push_back(file);
    return fs::path(cfg.out) / file;
  }
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void add_common(Command& c) {
  RunConfig& r = c.cfg;
  c.add("seed", r.seed, "random seed");
  c.add("out", r.out, "output directory");
  c.add("config", r.config, "JSON config file with flat keys named like the flags");
  c.add("determinism", r.determinism, "force bit-identical outputs (fixed reduction order, no timings)");
  c.add("threads", r.threads, "worker threads for rendering and aggregation");
}

void add_render(Command& c) {
  RunConfig& r = c.cfg;
  c.add("alpha-threshold", r.alpha_threshold, "alpha cut below which a pair does not contribute");
  c.add("transmittance-floor", r.transmittance_floor, "early-stop transmittance; 0 disables");
  c.add("lut-exp", r.lut_exp, "evaluate exp through the 64-entry lookup table");
  c.add("sigma-extent", r.sigma_extent, "bbox half-width in standard deviations");
  c.add("near-plane", r.near_plane, "near clipping depth in meters");
  c.add("lanes", r.lanes, "workers co-rendering one pixel");
}

void add_scene_shape(Command& c) {
  RunConfig& r = c.cfg;
  c.add("gaussians", r.gaussians, "number of synthetic Gaussians");
  c.add("width", r.width, "image width");
  c.add("height", r.height, "image height");
  c.add("focal", r.focal, "focal length in pixels");
  c.add("distance", r.distance, "camera distance from the box center");
}

void add_synth(Command& c) {
  RunConfig& r = c.cfg;
  add_scene_shape(c);
  c.add("frames", r.frames, "number of frames");
  c.add("motion", r.motion, "camera path: orbit or line");
  c.add("step-deg", r.step_deg, "orbit step per frame in degrees");
}

void add_tracking(Command& c) {
  RunConfig& r = c.cfg;
  c.add("wt", r.wt, "tracking tile size");
  c.add("st", r.st, "tracking iterations per frame");
  c.add("lr-pose-rotation", r.lr_pose_rotation, "Adam step for pose rotation");
  c.add("lr-pose-translation", r.lr_pose_translation, "Adam step for pose translation");
  c.add("tracking-lr-end", r.tracking_lr_end, "fraction of the pose learning rates left at the last iteration");
  c.add("divergence-patience", r.divergence_patience, "consecutive loss increases before giving up");
}

void add_mapping(Command& c) {
  RunConfig& r = c.cfg;
  c.add("wm", r.wm, "mapping tile size");
  c.add("sm", r.sm, "mapping iterations per keyframe");
  c.add("lr-means", r.lr_means, "Adam step for Gaussian means");
  c.add("lr-colors", r.lr_colors, "Adam step for Gaussian colors");
  c.add("lr-opacity", r.lr_opacity, "Adam step for opacity logits");
  c.add("lr-log-scale", r.lr_log_scale, "Adam step for log scales");
  c.add("lr-rotation", r.lr_rotation, "Adam step for Gaussian rotations");
  c.add("densify-footprint", r.densify_footprint, "inserted Gaussian scale in mapping tiles");
}

void add_aggunit(Command& c) {
  RunConfig& r = c.cfg;
  c.add("batch", r.batch, "pixel entries per aggregation step");
  c.add("cache-entries", r.cache_entries, "Gaussian cache capacity in records");
  c.add("scoreboard-entries", r.scoreboard_entries, "scoreboard capacity in records");
  c.add("load-latency", r.load_latency, "ticks until the first missed line arrives");
}

json pose_json(const CameraPose& pose) {
  const CameraPose c2w = pose.inverse();
  const Quat& q = c2w.rotation;
  return {{"t", {c2w.translation.x(), c2w.translation.y(), c2w.translation.z()}},
          {"q_xyzw", {q.x(), q.y(), q.z(), q.w()}}};
}

json number_or_inf(double v) { return std::isfinite(v) ? json(v) : json("inf"); }

void write_json(const fs::path& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << j.dump(2) << "\n";
}

std::optional<CameraPose> ground_truth_pose(const Dataset& ds, int frame) {
  for (const TrajectoryEntry& e : ds.ground_truth)
    if (e.frame == frame) return e.pose;
  return std::nullopt;
}

const Frame& frame_at(const Dataset& ds, int index) {
  for (const Frame& f : ds.frames)
    if (f.index == index) return f;
  throw std::invalid_argument("dataset has no frame " + std::to_string(index));
}

Dataset require_dataset(const RunConfig& r, int frames = -1) {
  if (r.dataset.empty()) throw std::invalid_argument("--dataset is required");
  return load_dataset(r.dataset, frames);
}

Scene require_scene(const RunConfig& r) {
  if (r.scene.empty()) throw std::invalid_argument("--scene is required");
  return load_scene(r.scene);
}

double elapsed_s(std::chrono::steady_clock::time_point t0, bool determinism) {
  if (determinism) return 0.0;
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- subcommands ------------------------------------------------------------

int run_synth(Command& c) {
  const SyntheticScene s = synth_scene(to_synth_config(c.cfg));
  save_dataset(c.cfg.out, s.dataset);
  for (const Frame& f : s.dataset.frames) {
    c.outputs.push_back(frame_stem(f.index) + ".rgb.ppm");
    c.outputs.push_back(frame_stem(f.index) + ".depth.f32");
  }
  c.outputs.push_back("camera.txt");
  c.outputs.push_back("groundtruth.txt");
  save_scene(c.out_path("scene.txt").string(), s.scene);
  c.results = {{"gaussians", s.scene.size()}, {"frames", s.dataset.frames.size()}};
  std::cout << "wrote " << s.dataset.frames.size() << " frames and " << s.scene.size()
            << " Gaussians to " << c.cfg.out << "\n";
  return kExitOk;
}

int run_render(Command& c, const std::string& pose_text) {
  const RunConfig& r = c.cfg;
  const Dataset ds = require_dataset(r, r.frame + 1);
  const Scene scene = require_scene(r);
  CameraPose pose = ds.camera();
  if (!pose_text.empty()) {
    std::istringstream is("0 " + pose_text);
    const Trajectory t = read_trajectory(is, ds.camera());
    if (t.empty()) throw std::invalid_argument("--pose needs 'tx ty tz qx qy qz qw'");
    pose = t[0].pose;
  } else if (auto gt = ground_truth_pose(ds, r.frame)) {
    pose = *gt;
  } else {
    throw std::invalid_argument("no ground-truth pose for frame " + std::to_string(r.frame) +
                                "; pass --pose");
  }
  const DenseRender out = render_dense_reference(scene, pose, to_render_config(r));
  write_ppm(c.out_path("render.ppm").string(), out.image);
  write_depth_f32(c.out_path("render.depth.f32").string(), out.depth);
  write_f32_grid(c.out_path("render.transmittance.f32").string(), out.transmittance);

  c.results = {{"pose", pose_json(pose)},
               {"visible", out.projection.visible},
               {"workload", to_json(out.trace)}};
  const auto it = std::find_if(ds.frames.begin(), ds.frames.end(),
                               [&](const Frame& f) { return f.index == r.frame; });
  if (it != ds.frames.end()) {
    const double psnr = compute_psnr(out.image, it->color);
    c.results["psnr_db"] = number_or_inf(psnr);
    std::cout << "psnr vs frame " << r.frame << ": " << psnr << " dB\n";
  }
  write_json(c.out_path("render.json"), c.results);
  return kExitOk;
}

int run_track(Command& c) {
  const RunConfig& r = c.cfg;
  if (r.frame < 1) throw std::invalid_argument("--frame must be >= 1 (tracking starts from frame k-1)");
  const Dataset ds = require_dataset(r, r.frame + 1);
  const Scene scene = require_scene(r);
  const Frame& frame = frame_at(ds, r.frame);
  const std::optional<CameraPose> prev = ground_truth_pose(ds, r.frame - 1);
  const CameraPose init = prev ? *prev : ds.camera();
  const TrackResult tr = track_frame(scene, frame, init, to_slam_config(r));

  Trajectory t;
  t.push_back(frame.index, tr.pose);
  std::ofstream os(c.out_path("track_pose.txt"));
  write_trajectory(os, t);
  c.results = {{"frame", frame.index},
               {"iterations", tr.iterations},
               {"losses", tr.losses},
               {"pose", pose_json(tr.pose)}};
  if (const auto gt = ground_truth_pose(ds, r.frame)) {
    const PoseError e = pose_error(tr.pose, *gt);
    c.results["translation_error_cm"] = 100.0 * e.translation_m;
    c.results["rotation_error_deg"] = e.rotation_deg;
    std::cout << "frame " << frame.index << ": " << 100.0 * e.translation_m << " cm, "
              << e.rotation_deg << " deg after " << tr.iterations << " iterations\n";
  }
  write_json(c.out_path("track.json"), c.results);
  return kExitOk;
}

int run_map(Command& c) {
  const RunConfig& r = c.cfg;
  const Dataset ds = require_dataset(r, r.frame + 1);
  Scene scene = r.scene.empty() ? Scene{} : load_scene(r.scene);
  const Frame& frame = frame_at(ds, r.frame);
  const std::optional<CameraPose> gt = ground_truth_pose(ds, r.frame);
  const CameraPose pose = gt ? *gt : ds.camera();
  const SlamConfig scfg = to_slam_config(r);
  const Keyframe kf{&frame, pose};
  const MapResult mr = map_update(scene, std::span<const Keyframe>(&kf, 1), scfg, 0);

  const DenseRender after = render_dense_reference(scene, pose, scfg.render);
  const std::size_t unseen_after =
      classify_unseen(TransmittanceMap::from_grid(after.transmittance)).size();
  const double pixels = static_cast<double>(ds.width) * ds.height;
  save_scene(c.out_path("map_scene.txt").string(), scene);
  c.results = {{"frame", frame.index},
               {"unseen_before", mr.unseen_before},
               {"unseen_after", unseen_after},
               {"unseen_fraction_before", static_cast<double>(mr.unseen_before) / pixels},
               {"unseen_fraction_after", static_cast<double>(unseen_after) / pixels},
               {"added", mr.densify.added},
               {"skipped_invalid_depth", mr.densify.skipped_invalid_depth},
               {"iterations", mr.iterations},
               {"losses", mr.losses},
               {"psnr_db", number_or_inf(compute_psnr(after.image, frame.color))}};
  write_json(c.out_path("map.json"), c.results);
  std::cout << "unseen pixels: " << mr.unseen_before << " -> " << unseen_after << " of " << pixels
            << "\n";
  return kExitOk;
}

int run_slam_cmd(Command& c) {
  const RunConfig& r = c.cfg;
  const auto t0 = std::chrono::steady_clock::now();
  const Dataset ds = require_dataset(r, r.max_frames);
  const SlamResult res = run_slam(ds, to_slam_config(r));
  const double wall = elapsed_s(t0, r.determinism);

  {
    std::ofstream os(c.out_path("trajectory.txt"));
    write_trajectory(os, res.trajectory);
  }
  {
    std::ofstream os(c.out_path("events.txt"));
    for (const SlamEvent& e : res.events) os << e.str() << "\n";
  }
  save_scene(c.out_path("scene.txt").string(), res.scene);

  json psnr = json::array();
  for (std::size_t i = 0; i < res.keyframes.size(); ++i)
    psnr.push_back({{"frame", res.keyframes[i]}, {"psnr_db", number_or_inf(res.keyframe_psnr[i])}});
  json metrics = {{"frames", ds.frames.size()},
                  {"gaussians", res.scene.size()},
                  {"psnr_db", psnr},
                  {"tracking_iterations", res.tracking_iterations},
                  {"mapping_iterations", res.mapping_iterations},
                  {"map_updates", res.map_updates},
                  {"wall_time_s", wall}};
  metrics["ate_cm"] = nullptr;
  if (ds.ground_truth.size() == res.trajectory.size()) {
    const double ate = compute_ate(res.trajectory, ds.ground_truth);
    metrics["ate_cm"] = ate;
    std::cout << "ATE " << ate << " cm over " << ds.frames.size() << " frames\n";
  }
  write_json(c.out_path("metrics.json"), metrics);
  c.results = metrics;
  return kExitOk;
}

int run_gradcheck_cmd(Command& c) {
  GradCheckConfig g;
  g.scenes = c.cfg.scenes;
  g.seed = c.cfg.seed;
  g.lambda_depth = c.cfg.lambda_depth;
  const GradCheckReport rep = run_gradcheck(g);

  std::map<std::string, double> per_param;
  for (const GradCheckEntry& e : rep.entries)
    per_param[e.param] = std::max(per_param[e.param], e.rel_error);
  c.results = {{"max_rel_error", rep.max_rel_error},
               {"checked", rep.checked},
               {"failures", rep.failures},
               {"skipped_discontinuous", rep.skipped_discontinuous},
               {"max_rel_error_by_param", per_param},
               {"tolerance", g.tolerance},
               {"passed", rep.passed()}};
  write_json(c.out_path("gradcheck.json"), c.results);
  std::cout << "max relative error: " << rep.max_rel_error << " over " << rep.checked
            << " parameters (" << rep.failures << " above " << g.tolerance << ")\n";
  if (!rep.passed()) throw NumericalFailure("gradient check failed");
  return kExitOk;
}

struct BenchFrame {
  Scene scene;
  CameraPose pose;
  Frame reference;
};

// A synthetic scene rendered from a camera slightly off the reference frame's pose.
BenchFrame bench_frame(const RunConfig& r) {
  SynthConfig sc = to_synth_config(r);
  sc.frames = 2;
  SyntheticScene s = synth_scene(sc);
  return {std::move(s.scene), s.dataset.ground_truth[1].pose, std::move(s.dataset.frames[0])};
}

std::uint64_t offchip_bytes(std::span<const PixelGradient> stream, std::size_t n,
                            const AggUnitConfig& cfg) {
  return simulate_aggregation(stream, n, cfg).stats.bytes_offchip;
}

int run_bench(Command& c, const std::string& trace_file) {
  const RunConfig& r = c.cfg;
  const BenchFrame bf = bench_frame(r);
  const RenderConfig rcfg = to_render_config(r);
  const AggUnitConfig acfg = to_agg_config(r);
  BackwardConfig bcfg;
  bcfg.lambda_depth = r.lambda_depth;
  bcfg.background = rcfg.background;

  const CounterRng rng(r.seed, RngPurpose::kBenchmark);
  const SampledPixelSet samples = sample_tracking(r.width, r.height, r.wt, rng.bits(0));
  const SparseRender sparse = render_sparse(bf.scene, bf.pose, samples, rcfg);
  const FrameBackward sbw =
      backward_frame(bf.scene, bf.pose, sparse, bf.reference.color, &bf.reference.depth, bcfg);
  WorkloadTrace st = sparse.trace;
  st += sbw.trace;
  st.bytes_offchip_model = offchip_bytes(sbw.pixels, bf.scene.size(), acfg);

  const DenseRender dense = render_dense_reference(bf.scene, bf.pose, rcfg);
  const SparseRender all =
      render_sparse(bf.scene, bf.pose, SampledPixelSet::dense(r.width, r.height), rcfg);
  const FrameBackward dbw =
      backward_frame(bf.scene, bf.pose, all, bf.reference.color, &bf.reference.depth, bcfg);
  WorkloadTrace dt = dense.trace;
  dt.gradient_partials = dbw.trace.gradient_partials;
  dt.aggregation_conflicts = dbw.trace.aggregation_conflicts;
  dt.bytes_offchip_model = offchip_bytes(dbw.pixels, bf.scene.size(), acfg);

  const WorkloadReport rep = count_workload(st, dt);
  c.results = to_json(rep);
  c.results["integrated_equals_alpha_passing"] = st.integrated_pairs == st.alpha_passing_pairs;
  write_json(c.out_path("workload.json"), c.results);
  if (!trace_file.empty()) save_gradient_trace(c.out_path(trace_file).string(), sbw.pixels);
  std::cout << "pixel_reduction=" << rep.pixel_reduction << " pair_reduction=" << rep.pair_reduction
            << " sort_key_reduction=" << rep.sort_key_reduction << "\n";
  return kExitOk;
}

// Difference per component relative to the sum of absolute terms feeding it,
// so components that cancel to near zero are not held to a tighter bound.
double max_rel_diff(const ScreenGradientBuffer& a, const ScreenGradientBuffer& b,
                    std::span<const PixelGradient> stream) {
  std::vector<std::array<double, kSplatGradientFloats>> mag(a.gaussians.size());
  for (auto& m : mag) m.fill(0.0);
  for (const PixelGradient& p : stream)
    for (const ContributorGradient& g : p.partials) {
      const auto v = SplatGradient::flatten(g);
      for (std::size_t k = 0; k < v.size(); ++k) mag[static_cast<std::size_t>(g.gaussian_id)][k] += std::abs(v[k]);
    }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.gaussians.size(); ++i) {
    const auto x = a.gaussians[i].flatten();
    const auto y = b.gaussians[i].flatten();
    for (std::size_t k = 0; k < x.size(); ++k)
      if (mag[i][k] > 0.0) worst = std::max(worst, std::abs(x[k] - y[k]) / mag[i][k]);
  }
  return worst;
}

int run_aggsim(Command& c) {
  const RunConfig& r = c.cfg;
  std::vector<PixelGradient> stream;
  std::size_t n = 0;
  if (!r.trace.empty()) {
    stream = load_gradient_trace(r.trace);
    for (const PixelGradient& p : stream)
      for (const ContributorGradient& g : p.partials)
        n = std::max(n, static_cast<std::size_t>(g.gaussian_id) + 1);
  } else {
    const BenchFrame bf = bench_frame(r);
    const RenderConfig rcfg = to_render_config(r);
    const SparseRender all =
        render_sparse(bf.scene, bf.pose, SampledPixelSet::dense(r.width, r.height), rcfg);
    BackwardConfig bcfg;
    bcfg.lambda_depth = r.lambda_depth;
    stream = backward_frame(bf.scene, bf.pose, all, bf.reference.color, &bf.reference.depth, bcfg).pixels;
    n = bf.scene.size();
  }
  const AggSimResult sim = simulate_aggregation(stream, n, to_agg_config(r));
  const ScreenGradientBuffer ref = aggregate(stream, n, AggregationMode::kDeterministic, 1);
  const double diff = max_rel_diff(sim.sums, ref, stream);
  c.results = {{"stats", to_json(sim.stats)},
               {"scene_size", n},
               {"max_rel_diff_vs_sequential", diff}};
  write_json(c.out_path("aggsim.json"), c.results);
  std::cout << "ticks " << sim.stats.total_ticks << ", stalls " << sim.stats.stall_ticks
            << ", hits " << sim.stats.cache_hits << ", misses " << sim.stats.cache_misses
            << ", max rel diff " << diff << "\n";
  if (!(diff <= 1e-9)) throw NumericalFailure("aggregation simulator disagrees with sequential sums");
  return kExitOk;
}

// ---- config plumbing --------------------------------------------------------

void apply_config_file(Command& c, const std::set<std::string>& known) {
  std::ifstream is(c.cfg.config);
  if (!is) throw std::invalid_argument("cannot open config " + c.cfg.config);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config " + c.cfg.config + ": " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument("unknown config key '" + key + "'");
    if (key == "config") continue;
    const auto it = std::find_if(c.knobs.begin(), c.knobs.end(),
                                 [&](const Knob& k) { return k.key == key; });
    if (it == c.knobs.end() || it->option->count() > 0) continue;  // other subcommand or overridden
    try {
      it->set(value);
    } catch (const json::exception& e) {
      throw std::invalid_argument("config key '" + key + "': " + e.what());
    }
  }
}

json manifest(const Command& c) {
  json config = json::object();
  for (const Knob& k : c.knobs) config[k.key] = k.get();
  return {{"command", c.name},
          {"version", kVersion},
          {"versions",
           {{"sgslam", kVersion},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                          "." + std::to_string(EIGEN_MINOR_VERSION)},
            {"scene_format", kSceneFormatVersion},
            {"trace_format", kTraceVersion}}},
          {"seed", c.cfg.seed},
          {"config", config},
          {"outputs", c.outputs}};
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
  CLI::App app{"Sparse pixel-sampled Gaussian-splatting SLAM toolkit", "sgslam"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::vector<std::unique_ptr<Command>> commands;
  auto make = [&](const std::string& name, const std::string& help) -> Command& {
    auto c = std::make_unique<Command>();
    c->name = name;
    c->app = app.add_subcommand(name, help);
    commands.push_back(std::move(c));
    add_common(*commands.back());
    return *commands.back();
  };

  Command& synth = make("synth", "generate a synthetic RGB-D dataset and its scene");
  add_render(synth);
  add_synth(synth);
  synth.run = run_synth;

  std::string pose_text;
  Command& render = make("render", "dense render of a scene from a dataset pose");
  add_render(render);
  render.add("scene", render.cfg.scene, "scene file");
  render.add("dataset", render.cfg.dataset, "dataset directory (intrinsics, poses)");
  render.add("frame", render.cfg.frame, "frame whose ground-truth pose is used");
  render.app->add_option("--pose", pose_text, "camera-to-world pose 'tx ty tz qx qy qz qw'");
  render.run = [&pose_text](Command& c) { return run_render(c, pose_text); };

  Command& track = make("track", "track one frame against a known map");
  add_render(track);
  add_tracking(track);
  track.add("lambda-depth", track.cfg.lambda_depth, "depth loss weight");
  track.add("scene", track.cfg.scene, "map scene file");
  track.add("dataset", track.cfg.dataset, "dataset directory");
  track.add("frame", track.cfg.frame, "frame to track; starts from frame-1 ground truth");
  track.cfg.frame = 1;
  track.run = run_track;

  Command& map = make("map", "run one mapping update on a frame at its ground-truth pose");
  add_render(map);
  add_mapping(map);
  map.add("lambda-depth", map.cfg.lambda_depth, "depth loss weight");
  map.add("scene", map.cfg.scene, "starting scene (empty map when omitted)");
  map.add("dataset", map.cfg.dataset, "dataset directory");
  map.add("frame", map.cfg.frame, "frame to map");
  map.run = run_map;

  Command& slam = make("slam", "full tracking and mapping over a dataset");
  add_render(slam);
  add_tracking(slam);
  add_mapping(slam);
  slam.add("lambda-depth", slam.cfg.lambda_depth, "depth loss weight");
  slam.add("mapping-every", slam.cfg.mapping_every, "map every k-th frame");
  slam.add("window", slam.cfg.window, "keyframes per mapping window");
  slam.add("dataset", slam.cfg.dataset, "dataset directory");
  slam.add("max-frames", slam.cfg.max_frames, "limit on frames read; -1 reads all");
  slam.run = run_slam_cmd;

  Command& gradcheck = make("gradcheck", "finite-difference check of the analytic gradients");
  gradcheck.add("scenes", gradcheck.cfg.scenes, "random scenes to check");
  gradcheck.add("lambda-depth", gradcheck.cfg.lambda_depth, "depth loss weight");
  gradcheck.run = run_gradcheck_cmd;

  std::string trace_file;
  Command& bench = make("bench", "workload counters, sparse pixel pipeline vs dense tiles");
  bench.cfg.transmittance_floor = 0.0;
  add_render(bench);
  add_scene_shape(bench);
  add_aggunit(bench);
  bench.add("wt", bench.cfg.wt, "tracking tile size");
  bench.add("lambda-depth", bench.cfg.lambda_depth, "depth loss weight");
  bench.app->add_option("--trace", trace_file, "also write the sparse gradient trace to this file");
  bench.run = [&trace_file](Command& c) { return run_bench(c, trace_file); };

  Command& aggsim = make("aggsim", "replay a gradient trace through the aggregation unit model");
  add_render(aggsim);
  add_scene_shape(aggsim);
  add_aggunit(aggsim);
  aggsim.add("trace", aggsim.cfg.trace, "gradient trace; a synthetic dense frame when omitted");
  aggsim.add("lambda-depth", aggsim.cfg.lambda_depth, "depth loss weight");
  aggsim.run = run_aggsim;

  std::set<std::string> known;
  for (const auto& c : commands)
    for (const Knob& k : c->knobs) known.insert(k.key);

  if (argc <= 1) {
    std::cerr << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    if (rc != 0) std::cerr << "\n" << app.help();
    return rc == 0 ? kExitOk : kExitUsage;
  }

  for (auto& c : commands) {
    if (!c->app->parsed()) continue;
    try {
      if (!c->cfg.config.empty()) apply_config_file(*c, known);
      if (c->cfg.threads < 1) throw std::invalid_argument("--threads must be >= 1");
      fs::create_directories(c->cfg.out);
      const int rc = c->run(*c);
      write_json(fs::path(c->cfg.out) / (c->name + ".manifest.json"), manifest(*c));
      return rc;
    } catch (const TrackingDivergence& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitNumerical;
    } catch (const NumericalFailure& e) {
      write_json(fs::path(c->cfg.out) / (c->name + ".manifest.json"), manifest(*c));
      std::cerr << "error: " << e.what() << "\n";
      return kExitNumerical;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUsage;
    }
  }
  return kExitUsage;
}

int cli_dispatch(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"sgslam"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  return cli_dispatch(static_cast<int>(argv.size()), argv.data());
}

}  // namespace sgslam
