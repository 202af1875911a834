// Translation re-initialization after rotation averaging: each camera of the
// window, in chain order, gets a single translation-only Gauss-Newton step
// of the photometric objective against its parent with its rotation frozen
// to the averaged value; absolute poses are then re-chained.

#ifndef EGOVO_REFINE_HPP
#define EGOVO_REFINE_HPP

#include <vector>

#include "egovo/tracker.hpp"

namespace egovo {

struct RefineCamera {
  int id = 0;
  Rotation world_to_cam;  // averaged
  Pose from_parent;       // previous this_from_parent estimate (unused for the anchor)
  /// Parent keyframe data and this camera's finest image; null when no longer
  /// available, in which case the camera is re-chained without refinement.
  const TrackingReference* parent_ref = nullptr;
  const PyramidLevel* image = nullptr;
};

struct RefineCameraReport {
  int id = 0;
  bool refined = false;   // a photometric step was attempted
  bool accepted = false;  // the step was kept
  double error_before = 0.0;
  double error_after = 0.0;
};

struct RefineResult {
  std::vector<Pose> pose_world;   // world_from_camera per camera
  std::vector<Pose> from_parent;  // this_from_parent per camera (identity for the anchor)
  std::vector<RefineCameraReport> reports;
};

/// `cams[0]` is the window anchor with world pose `anchor_world`. The
/// rotation of every output world pose is exactly the transpose of the
/// camera's averaged rotation.
RefineResult reinit_translations(const Tracker& tracker, const std::vector<RefineCamera>& cams,
                                 const Pose& anchor_world);

}  // namespace egovo

#endif  // EGOVO_REFINE_HPP
