#ifndef EGOVO_TEST_UTIL_HPP
#define EGOVO_TEST_UTIL_HPP

#include <random>

#include "egovo/depthmap.hpp"
#include "egovo/geometry.hpp"
#include "egovo/synth.hpp"

namespace egovo::test {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

inline Vec3 random_vec(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return scale * Vec3(u(rng), u(rng), u(rng));
}

// Axis uniform on the sphere, angle uniform in [0, max_angle).
inline RotVec random_rotvec(std::mt19937_64& rng, double max_angle) {
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, max_angle);
  Vec3 axis(n(rng), n(rng), n(rng));
  return axis.normalized() * u(rng);
}

inline Rotation random_rotation(std::mt19937_64& rng, double max_angle = kPi) {
  return exp_so3(random_rotvec(rng, max_angle));
}

inline Pose random_pose(std::mt19937_64& rng, double max_angle, double max_t) {
  return {random_rotation(rng, max_angle), random_vec(rng, max_t)};
}

/// Default 160x120 synthetic scene used throughout the tests. The texture is
/// scaled with the distance so that its image-space density stays that of
/// the default plane.
inline SceneSpec plane_scene(double distance, uint64_t texture_seed = 1) {
  SceneSpec s;
  s.plane_distance = distance;
  s.texture_scale = distance / SceneSpec{}.plane_distance;
  s.texture_seed = texture_seed;
  return s;
}

/// Exact inverse depth at every pixel of the gradient mask.
inline InverseDepthMap gt_depth_map(const RenderedFrame& f, const PyramidLevel& level,
                                    const DepthConfig& cfg = {}, double sigma2 = 1e-6) {
  InverseDepthMap m(level.image.width(), level.image.height());
  const auto mask = gradient_mask(level, cfg.grad_min);
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) m.set(i, 1.0 / f.depth[i], sigma2, 1.0);
  }
  return m;
}

}  // namespace egovo::test

#endif  // EGOVO_TEST_UTIL_HPP
