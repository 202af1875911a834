// Keyframe lifecycle, the retention-limited archive and absolute pose
// chaining from the first keyframe.

#ifndef EGOVO_KEYFRAME_GRAPH_HPP
#define EGOVO_KEYFRAME_GRAPH_HPP

#include <cstdint>
#include <deque>

#include "egovo/depthmap.hpp"
#include "egovo/image.hpp"

namespace egovo {

struct Keyframe {
  int id = 0;
  int frame_index = 0;
  Pyramid pyramid;
  InverseDepthMap depth;
  Pose pose_world;  // world_from_camera; identity for the first keyframe
  IntensityHistogram hist;
  int parent_id = -1;
  Pose odom_from_parent;  // this_from_parent as tracked
  Pose from_parent;       // this_from_parent after any refinement
  bool rebootstrapped = false;
};

struct KeyframePolicy {
  int keyframe_every = 10;
  double min_overlap = 0.4;
  int window_frames = 300;
  int min_points = 500;
};

bool should_create_keyframe(int frames_since_keyframe, double last_valid_fraction,
                            const KeyframePolicy& policy);

/// New keyframe from `frame` at `new_from_prev` relative to `prev`. The depth
/// map is propagated from `prev`, or re-bootstrapped with `seed` when fewer
/// than policy.min_points survive.
Keyframe create_keyframe(const Keyframe& prev, const Pyramid& frame, const Pose& new_from_prev,
                         int frame_index, int id, const Intrinsics& k, const DepthConfig& depth_cfg,
                         const KeyframePolicy& policy, uint64_t seed);

/// First keyframe of a trajectory segment, at the world origin.
Keyframe initial_keyframe(const Pyramid& frame, int frame_index, int id, const DepthConfig& cfg,
                          uint64_t seed);

/// world_from_frame given world_from_keyframe and the tracked
/// frame_from_keyframe.
Pose absolute_pose(const Pose& kf_pose_world, const Pose& frame_from_kf);

/// Keyframes ordered by id with current_frame - frame_index <= window. The
/// newest keyframe is never pruned.
class Archive {
 public:
  void push(Keyframe kf);
  void prune(int current_frame, int window_frames);
  void clear() { kfs_.clear(); }

  bool empty() const { return kfs_.empty(); }
  size_t size() const { return kfs_.size(); }
  Keyframe& back() { return kfs_.back(); }
  const Keyframe& back() const { return kfs_.back(); }
  Keyframe* find(int id);
  const Keyframe* find(int id) const;
  std::deque<Keyframe>& keyframes() { return kfs_; }
  const std::deque<Keyframe>& keyframes() const { return kfs_; }

 private:
  std::deque<Keyframe> kfs_;
};

}  // namespace egovo

#endif  // EGOVO_KEYFRAME_GRAPH_HPP
