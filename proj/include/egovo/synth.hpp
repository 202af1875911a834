// Synthetic ground truth: textured planes rendered under a walking,
// head-sweeping camera, plus trajectory evaluation against ground truth.

#ifndef EGOVO_SYNTH_HPP
#define EGOVO_SYNTH_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "egovo/camera.hpp"
#include "egovo/image.hpp"
#include "egovo/trajectory.hpp"

namespace egovo {

/// Fronto-parallel rectangle in front of the main plane.
struct Occluder {
  double distance = 1.0;
  double x_min = -0.5, x_max = 0.5;
  double y_min = -0.5, y_max = 0.5;
};

struct SceneSpec {
  double plane_distance = 6.0;  // fronto-parallel plane z = plane_distance
  uint64_t texture_seed = 1;
  double texture_scale = 1.0;  // world units per texture unit
  Intrinsics intrinsics{150.0, 150.0, 79.5, 59.5, 160, 120};
  double noise_sigma = 0.0;  // additive Gaussian intensity noise
  std::optional<Occluder> occluder;
};

struct WalkSpec {
  double forward_speed = 0.02;  // units / frame along +z
  double yaw_amplitude = 0.0;   // radians
  double sweep_frequency = 1.0 / 40.0;  // cycles / frame
  double bob_amplitude = 0.0;   // vertical head bob, two bobs per sweep
  int frames = 1;
};

/// Procedural value-noise texture on the plane; deterministic per seed.
class PlaneTexture {
 public:
  explicit PlaneTexture(uint64_t seed) : seed_(seed) {}
  double operator()(double x, double y) const;

 private:
  uint64_t seed_;
};

/// world_from_camera of frame t (not re-anchored).
Pose walk_pose(const WalkSpec& walk, int t);

struct RenderedFrame {
  GrayImage image;
  std::vector<double> depth;  // per pixel, camera z
};

/// Renders `world_from_camera` of the scene. Throws ConfigError when a pixel
/// ray misses the scene or hits it closer than the minimum depth.
RenderedFrame render(const SceneSpec& scene, const Pose& world_from_camera, uint64_t noise_seed);

struct SyntheticSequence {
  std::vector<GrayImage> frames;
  std::vector<Pose> poses;  // world_from_camera relative to frame 0
  std::vector<std::vector<double>> depths;
};

SyntheticSequence generate(const SceneSpec& scene, const WalkSpec& walk, uint64_t seed);

enum class Alignment { kSim3, kNone };

struct SegmentMetrics {
  int segment = 0;
  int frames = 0;
  double ate_rmse = 0.0;
  double scale = 1.0;
  double rot_err_mean = 0.0;  // radians
  double rot_err_max = 0.0;
  double rot_err_final = 0.0;
};

struct EvalMetrics {
  std::vector<SegmentMetrics> segments;
  double ate_rmse = 0.0;      // pooled over evaluated segments
  double rot_err_mean = 0.0;  // radians
  double rot_err_final = 0.0; // last evaluated segment
  std::vector<std::string> warnings;
};

/// Compares an estimate with ground truth indexed by frame. Each segment is
/// re-anchored at its first ground-truth pose, positions are aligned with a
/// similarity transform and orientations with the best global rotation.
/// Segments shorter than three frames are skipped with a warning.
EvalMetrics evaluate(const Trajectory& traj, const std::vector<Pose>& gt,
                     Alignment alignment = Alignment::kSim3);

}  // namespace egovo

#endif  // EGOVO_SYNTH_HPP
