// Pinhole camera: projection, back-projection, the frame-to-frame warp and
// epipolar segments. Frames are assumed to be undistorted.

#ifndef EGOVO_CAMERA_HPP
#define EGOVO_CAMERA_HPP

#include <optional>
#include <vector>

#include "egovo/geometry.hpp"

namespace egovo {

using Mat26 = Eigen::Matrix<double, 2, 6>;

struct Intrinsics {
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;

  /// Throws ConfigError unless fx, fy > 0 and the principal point lies inside
  /// the image.
  void validate() const;
  /// Intrinsics of pyramid level `level` for 2x2 mean downsampling.
  Intrinsics at_level(int level) const;
  bool contains(double x, double y) const {
    return x >= 0.0 && y >= 0.0 && x <= width - 1.0 && y <= height - 1.0;
  }
};

struct Pixel {
  double x = 0.0;
  double y = 0.0;
};

/// Minimum depth accepted for warped points.
inline constexpr double kDefaultMinDepth = 0.05;

Vec3 unproject(const Intrinsics& k, const Pixel& px, double depth);
Pixel project(const Intrinsics& k, const Vec3& x);

/// Maps `px` (at depth `depth` in the reference camera) into the camera at
/// `pose` (reference-to-target). Returns nullopt when the point lands behind
/// the target camera, closer than `min_depth`, or outside the image.
std::optional<Pixel> warp(const Intrinsics& k, const Pose& pose, const Pixel& px, double depth,
                          double min_depth = kDefaultMinDepth);

/// d warp / d xi for a left-multiplied increment exp(xi) * pose, xi = [w, v],
/// evaluated at xi = 0.
std::optional<Mat26> warp_jacobian(const Intrinsics& k, const Pose& pose, const Pixel& px,
                                   double depth, double min_depth = kDefaultMinDepth);

/// 2x6 derivative of the projection of X' w.r.t. a left increment of the pose,
/// given X' in the target frame.
Mat26 projection_twist_jacobian(double fx, double fy, const Vec3& xt);

struct EpipolarSample {
  Pixel px;
  double inv_depth = 0.0;
};

/// Locus of `px` warped at inverse depths in [rho_min, rho_max], sampled no
/// more than one pixel apart and clipped to the target image. Without
/// parallax the locus collapses to a single sample.
std::vector<EpipolarSample> epipolar_segment(const Intrinsics& k, const Pose& pose,
                                             const Pixel& px, double rho_min, double rho_max,
                                             double min_depth = kDefaultMinDepth);

}  // namespace egovo

#endif  // EGOVO_CAMERA_HPP
