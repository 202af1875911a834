// egovo: run the odometry engine on a frame directory, generate synthetic
// sequences, evaluate trajectories and export plot data.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <string>

#include "egovo/errors.hpp"
#include "egovo/io.hpp"
#include "egovo/pipeline.hpp"
#include "egovo/synth.hpp"

namespace fs = std::filesystem;
using namespace egovo;

namespace {

constexpr double kDeg = 3.14159265358979323846 / 180.0;
constexpr int kUsageError = 2;

struct RunArgs {
  std::string calib;
  std::string input;
  std::string output;
  std::string config;
  int keyframe_every = 10;
  int window_frames = 300;
  double kl_threshold = 0.0;
  double view_angle_deg = 0.0;
  bool no_loop_closure = false;
  bool no_rotavg = false;
  uint64_t seed = 0;
  int pyramid_levels = 0;
  bool quiet = false;
  std::string dump_depth;
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

int cmd_run(const RunArgs& a, const CLI::App& sub) {
  PipelineConfig cfg;
  if (!a.config.empty()) {
    for (const auto& [k, v] : read_key_values(a.config)) apply_config_value(cfg, k, v);
  }
  auto given = [&](const char* name) { return sub.get_option(name)->count() > 0; };
  if (given("--keyframe-every")) apply_config_value(cfg, "keyframe_every", std::to_string(a.keyframe_every));
  if (given("--window-frames")) apply_config_value(cfg, "window_frames", std::to_string(a.window_frames));
  if (given("--kl-threshold")) cfg.closure.kl_threshold = a.kl_threshold;
  if (given("--view-angle-deg")) cfg.closure.view_angle_max = a.view_angle_deg * kDeg;
  if (given("--seed")) cfg.seed = a.seed;
  if (given("--pyramid-levels")) cfg.pyramid_levels = a.pyramid_levels;
  if (a.no_loop_closure) cfg.enable_loop_closure = false;
  if (a.no_rotavg) cfg.enable_rotavg = false;

  const auto frames = list_frames(a.input);
  if (frames.empty()) throw IoError("no PGM or PNG frames in " + a.input);

  // Decoding runs one frame ahead of processing.
  auto load = [&](size_t i) { return std::async(std::launch::async, read_image, frames[i]); };
  std::future<GrayImage> next = load(0);
  GrayImage first = next.get();

  Intrinsics k;
  if (a.calib == "gopro") {
    k = gopro_preset(first.width(), first.height());
  } else {
    k = read_calibration(a.calib);
  }
  if (first.width() != k.width || first.height() != k.height) {
    throw ConfigError("frame size " + std::to_string(first.width()) + "x" +
                      std::to_string(first.height()) + " does not match the calibration " +
                      std::to_string(k.width) + "x" + std::to_string(k.height));
  }
  ensure_dir(a.output);

  Pipeline pipeline(k, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  GrayImage current = std::move(first);
  for (size_t i = 0; i < frames.size(); ++i) {
    if (i + 1 < frames.size()) next = load(i + 1);
    if (current.width() != k.width || current.height() != k.height) {
      throw ConfigError(frames[i] + ": frame size does not match the calibration");
    }
    const FrameRecord& r = pipeline.process_frame(current);
    if (!a.quiet && r.lost) std::cerr << "frame " << r.frame_index << ": tracking lost, new segment " << r.segment << '\n';
    if (i + 1 < frames.size()) current = next.get();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path out(a.output);
  write_trajectory((out / "trajectory.txt").string(), pipeline.trajectory());
  write_closures_csv((out / "closures.csv").string(), pipeline.closures());
  write_stats_csv((out / "stats.csv").string(), pipeline.records());
  if (!a.dump_depth.empty()) {
    ensure_dir(a.dump_depth);
    for (const auto& kf : pipeline.archive().keyframes()) {
      char name[32];
      std::snprintf(name, sizeof name, "kf_%06d", kf.id);
      write_depth_dump((fs::path(a.dump_depth) / name).string(), kf.depth);
    }
  }
  if (!a.quiet) {
    int accepted = 0;
    for (const auto& c : pipeline.closures()) accepted += c.converged ? 1 : 0;
    std::printf("%zu frames, %d segment(s), %zu keyframes, %d closure edges, %.1f frames/s\n",
                frames.size(), pipeline.trajectory().num_segments(),
                static_cast<size_t>(pipeline.archive().keyframes().back().id + 1), accepted,
                frames.size() / std::max(secs, 1e-9));
  }
  return 0;
}

struct SynthArgs {
  std::string output;
  int frames = 200;
  uint64_t seed = 1;
  double speed = 0.02;
  double yaw_deg = 20.0;
  double frequency = 1.0 / 40.0;
  double bob = 0.0;
  double plane_distance = 6.0;
  double texture_scale = 1.0;
  double noise = 0.0;
  int width = 160;
  int height = 120;
  double fx = 150.0;
};

int cmd_synth(const SynthArgs& a) {
  SceneSpec scene;
  scene.plane_distance = a.plane_distance;
  scene.texture_seed = a.seed;
  scene.texture_scale = a.texture_scale;
  scene.noise_sigma = a.noise;
  const double f = a.fx * a.width / 160.0;
  scene.intrinsics = {f, f, 0.5 * (a.width - 1), 0.5 * (a.height - 1), a.width, a.height};
  WalkSpec walk;
  walk.forward_speed = a.speed;
  walk.yaw_amplitude = a.yaw_deg * kDeg;
  walk.sweep_frequency = a.frequency;
  walk.bob_amplitude = a.bob;
  walk.frames = a.frames;
  const SyntheticSequence seq = generate(scene, walk, a.seed);

  const fs::path out(a.output);
  ensure_dir((out / "frames").string());
  for (size_t t = 0; t < seq.frames.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.pgm", t);
    write_pgm((out / "frames" / name).string(), seq.frames[t]);
  }
  write_calibration((out / "calib.txt").string(), scene.intrinsics);
  write_poses((out / "groundtruth.txt").string(), seq.poses);
  std::printf("wrote %zu frames to %s\n", seq.frames.size(), (out / "frames").string().c_str());
  return 0;
}

struct EvalArgs {
  std::string estimate;
  std::string groundtruth;
  std::string json;
  std::string stats;
  bool no_align = false;
};

int cmd_eval(const EvalArgs& a) {
  Trajectory est = read_trajectory(a.estimate);
  if (!a.stats.empty()) assign_segments(est, a.stats);
  const Trajectory gt_traj = read_trajectory(a.groundtruth);
  int max_frame = -1;
  for (const auto& e : gt_traj.entries) max_frame = std::max(max_frame, e.frame_index);
  std::vector<Pose> gt(static_cast<size_t>(max_frame + 1));
  std::vector<bool> have(gt.size(), false);
  for (const auto& e : gt_traj.entries) {
    gt[e.frame_index] = e.pose;
    have[e.frame_index] = true;
  }
  for (const auto& e : est.entries) {
    if (e.frame_index < 0 || e.frame_index > max_frame || !have[e.frame_index]) {
      throw ConfigError("no ground truth for frame " + std::to_string(e.frame_index));
    }
  }
  const EvalMetrics m = evaluate(est, gt, a.no_align ? Alignment::kNone : Alignment::kSim3);

  for (const auto& w : m.warnings) std::cerr << "warning: " << w << '\n';
  nlohmann::json j;
  j["ate_rmse"] = m.ate_rmse;
  j["rot_err_mean_deg"] = m.rot_err_mean / kDeg;
  j["rot_err_final_deg"] = m.rot_err_final / kDeg;
  j["alignment"] = a.no_align ? "none" : "sim3";
  j["segments"] = nlohmann::json::array();
  std::printf("segments evaluated: %zu\n", m.segments.size());
  for (const auto& s : m.segments) {
    std::printf("  segment %d: %d frames, ATE %.6f, scale %.4f, rotation mean %.4f deg, max %.4f deg, final %.4f deg\n",
                s.segment, s.frames, s.ate_rmse, s.scale, s.rot_err_mean / kDeg, s.rot_err_max / kDeg,
                s.rot_err_final / kDeg);
    j["segments"].push_back({{"segment", s.segment},
                             {"frames", s.frames},
                             {"ate_rmse", s.ate_rmse},
                             {"scale", s.scale},
                             {"rot_err_mean_deg", s.rot_err_mean / kDeg},
                             {"rot_err_max_deg", s.rot_err_max / kDeg},
                             {"rot_err_final_deg", s.rot_err_final / kDeg}});
  }
  j["warnings"] = m.warnings;
  std::printf("ATE-RMSE %.6f\nrotation error mean %.4f deg, final %.4f deg\n", m.ate_rmse,
              m.rot_err_mean / kDeg, m.rot_err_final / kDeg);
  std::printf("%s\n", j.dump().c_str());
  if (!a.json.empty()) {
    std::ofstream out(a.json, std::ios::trunc);
    if (!out) throw IoError("cannot write " + a.json);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("error while writing " + a.json);
  }
  return 0;
}

int cmd_plotdata(const std::string& trajectory, const std::string& output) {
  write_plotdata_csv(output, read_trajectory(trajectory));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monocular direct visual odometry for egocentric video"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "track a directory of frames");
  run_cmd->add_option("--calib", run.calib, "calibration file, or 'gopro' for the preset")->required();
  run_cmd->add_option("--input", run.input, "directory of numbered PGM/PNG frames")->required();
  run_cmd->add_option("--output", run.output, "output directory")->required();
  run_cmd->add_option("--config", run.config, "key=value configuration file");
  run_cmd->add_option("--keyframe-every", run.keyframe_every, "frames between keyframes")->capture_default_str();
  run_cmd->add_option("--window-frames", run.window_frames, "keyframe archive horizon in frames")->capture_default_str();
  run_cmd->add_option("--kl-threshold", run.kl_threshold, "histogram divergence threshold");
  run_cmd->add_option("--view-angle-deg", run.view_angle_deg, "view vector angle threshold");
  run_cmd->add_flag("--no-loop-closure", run.no_loop_closure, "disable local loop closures");
  run_cmd->add_flag("--no-rotavg", run.no_rotavg, "disable rotation averaging");
  run_cmd->add_option("--seed", run.seed, "depth bootstrap seed");
  run_cmd->add_option("--pyramid-levels", run.pyramid_levels, "0 picks from the image size");
  run_cmd->add_flag("--quiet", run.quiet, "no progress output");
  run_cmd->add_option("--dump-depth", run.dump_depth, "write the depth maps of the retained keyframes here");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "render a synthetic walking sequence");
  synth_cmd->add_option("--output", synth.output, "output directory")->required();
  synth_cmd->add_option("--frames", synth.frames)->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed)->capture_default_str();
  synth_cmd->add_option("--speed", synth.speed, "forward units per frame")->capture_default_str();
  synth_cmd->add_option("--yaw-deg", synth.yaw_deg, "head sweep amplitude")->capture_default_str();
  synth_cmd->add_option("--frequency", synth.frequency, "sweeps per frame")->capture_default_str();
  synth_cmd->add_option("--bob", synth.bob, "vertical bob amplitude")->capture_default_str();
  synth_cmd->add_option("--plane-distance", synth.plane_distance)->capture_default_str();
  synth_cmd->add_option("--texture-scale", synth.texture_scale)->capture_default_str();
  synth_cmd->add_option("--noise", synth.noise, "intensity noise sigma")->capture_default_str();
  synth_cmd->add_option("--width", synth.width)->capture_default_str();
  synth_cmd->add_option("--height", synth.height)->capture_default_str();
  synth_cmd->add_option("--fx", synth.fx, "focal length at 160 px width")->capture_default_str();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "compare a trajectory with ground truth");
  eval_cmd->add_option("--estimate", eval.estimate)->required();
  eval_cmd->add_option("--groundtruth", eval.groundtruth)->required();
  eval_cmd->add_option("--json", eval.json, "also write the metrics to this file");
  eval_cmd->add_option("--stats", eval.stats, "stats CSV of the run, for segment ids");
  eval_cmd->add_flag("--no-align", eval.no_align, "skip the similarity alignment");

  std::string plot_in, plot_out;
  auto* plot_cmd = app.add_subcommand("plotdata", "per-axis translation and rotation series");
  plot_cmd->add_option("--trajectory", plot_in)->required();
  plot_cmd->add_option("--output", plot_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) return cmd_run(run, *run_cmd);
    if (*synth_cmd) return cmd_synth(synth);
    if (*eval_cmd) return cmd_eval(eval);
    if (*plot_cmd) return cmd_plotdata(plot_in, plot_out);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  }
  return 1;
}
