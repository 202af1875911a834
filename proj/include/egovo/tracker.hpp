// Coarse-to-fine direct image alignment of a frame against a keyframe's
// semi-dense inverse-depth map, by weighted Gauss-Newton on SE(3).

#ifndef EGOVO_TRACKER_HPP
#define EGOVO_TRACKER_HPP

#include <vector>

#include "egovo/camera.hpp"
#include "egovo/depthmap.hpp"
#include "egovo/image.hpp"

namespace egovo {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Row6 = Eigen::Matrix<double, 1, 6>;

struct TrackerConfig {
  double huber_delta = 0.05;
  int max_iterations = 20;
  double step_tolerance = 1e-6;
  int max_halvings = 5;
  double max_condition = 1e12;
  double min_valid_fraction = 0.3;
  int min_points = 500;
  /// Mean robust residual above which the alignment is declared lost.
  double max_error = 0.003;
  double min_depth = kDefaultMinDepth;
  /// Intensity noise used to discount points whose inverse depth is still
  /// uncertain along the current warp.
  double photometric_sigma = 0.01;
  /// Linearize the coarser levels with bilinearly interpolated
  /// central-difference gradients instead of the exact, piecewise constant
  /// derivative of the bilinear interpolant. Widens the basin of convergence
  /// considerably; the finest level always uses the exact derivative.
  bool smooth_gradients = true;
};

struct TrackResult {
  Pose pose;  // frame_from_keyframe
  double final_error = 0.0;
  double valid_pixel_fraction = 0.0;
  std::vector<int> iterations_per_level;  // accepted updates, coarsest first
  bool converged = false;

  int total_iterations() const;
};

struct ReferencePoint {
  Vec3 ray;  // normalized ray (x, y, 1) at this level
  double rho;
  double sigma2;
  double weight;
  double intensity;
};

/// Keyframe pixels with valid depth, aggregated per pyramid level.
struct TrackingReference {
  std::vector<std::vector<ReferencePoint>> levels;
  int num_levels() const { return static_cast<int>(levels.size()); }
};

TrackingReference make_reference(const Pyramid& ref, const InverseDepthMap& depth,
                                 const Intrinsics& k);

struct ResidualTerm {
  int point = 0;
  double residual = 0.0;
  Row6 jacobian = Row6::Zero();  // d residual / d left twist increment
};

struct RefineStep {
  Pose pose;
  double error_before = 0.0;
  double error_after = 0.0;
  bool accepted = false;
};

/// Constant-velocity initialization. An invalid prior predicts the identity.
struct MotionPrior {
  Pose last_rel;  // last frame_from_keyframe against the current keyframe
  Pose velocity;  // last frame-to-frame motion
  bool valid = false;

  Pose predict() const { return valid ? velocity * last_rel : Pose::identity(); }
  /// Advances the model with the newest frame_from_keyframe estimate.
  void update(const Pose& rel);
  /// The keyframe is now the last frame; relative motion restarts at identity.
  void rebase() { last_rel = Pose::identity(); }
  void reset() { *this = MotionPrior{}; }
};

class Tracker {
 public:
  Tracker(const Intrinsics& k, const TrackerConfig& cfg);

  /// Throws TrackingLost when the keyframe has too few depth points, the
  /// normal equations are rank deficient, too few points stay in view or the
  /// final error exceeds max_error.
  TrackResult track(const Pyramid& ref, const InverseDepthMap& depth, const Pyramid& frame,
                    const Pose& init) const;
  TrackResult track(const TrackingReference& ref, const Pyramid& frame, const Pose& init) const;

  TrackResult track_with_motion_prior(const Pyramid& ref, const InverseDepthMap& depth,
                                      const Pyramid& frame, const MotionPrior& prior) const;

  /// Residuals I'(warp(x)) - I(x) and their Jacobians for in-view points.
  /// The Jacobians are the exact derivatives of the bilinear residual.
  std::vector<ResidualTerm> residual_terms(const TrackingReference& ref, int level,
                                           const PyramidLevel& frame, const Pose& pose) const;

  /// Mean robust weighted squared residual at `level`; also reports the
  /// fraction of points in view.
  double error(const TrackingReference& ref, int level, const PyramidLevel& frame,
               const Pose& pose, double* valid_fraction = nullptr) const;

  /// One Gauss-Newton step on the translation only, at the finest level.
  /// The rotation of the returned pose is `init.r` exactly; the step is
  /// rejected when it would increase the error.
  RefineStep refine_translation(const TrackingReference& ref, const PyramidLevel& frame,
                                const Pose& init) const;

  const Intrinsics& intrinsics() const { return k_; }
  const TrackerConfig& config() const { return cfg_; }

 private:
  struct Normal {
    Mat6 h = Mat6::Zero();
    Vec6 b = Vec6::Zero();
    double cost = 0.0;
    double weight_sum = 0.0;
    int valid = 0;
    double error() const { return weight_sum > 0.0 ? cost / weight_sum : 0.0; }
  };

  Normal linearize(const std::vector<ReferencePoint>& pts, const Intrinsics& k,
                   const PyramidLevel& frame, const Pose& pose, bool smooth) const;
  double huber_cost(double r) const;
  double huber_weight(double r) const;

  Intrinsics k_;
  TrackerConfig cfg_;
};

}  // namespace egovo

#endif  // EGOVO_TRACKER_HPP
