#include "egovo/keyframe_graph.hpp"

#include <algorithm>

#include "egovo/errors.hpp"

namespace egovo {

bool should_create_keyframe(int frames_since_keyframe, double last_valid_fraction,
                            const KeyframePolicy& policy) {
  return frames_since_keyframe >= policy.keyframe_every ||
         last_valid_fraction < policy.min_overlap;
}

Keyframe initial_keyframe(const Pyramid& frame, int frame_index, int id, const DepthConfig& cfg,
                          uint64_t seed) {
  Keyframe kf;
  kf.id = id;
  kf.frame_index = frame_index;
  kf.pyramid = frame;
  kf.depth = bootstrap(frame.level(0), seed, cfg);
  kf.hist = histogram(frame.level(0).image);
  return kf;
}

Keyframe create_keyframe(const Keyframe& prev, const Pyramid& frame, const Pose& new_from_prev,
                         int frame_index, int id, const Intrinsics& k, const DepthConfig& depth_cfg,
                         const KeyframePolicy& policy, uint64_t seed) {
  Keyframe kf;
  kf.id = id;
  kf.frame_index = frame_index;
  kf.pyramid = frame;
  kf.depth = propagate(prev.depth, new_from_prev, frame.level(0), k, depth_cfg);
  if (kf.depth.valid_count() < policy.min_points) {
    kf.depth = bootstrap(frame.level(0), seed, depth_cfg);
    kf.rebootstrapped = true;
  }
  kf.pose_world = absolute_pose(prev.pose_world, new_from_prev);
  kf.hist = histogram(frame.level(0).image);
  kf.parent_id = prev.id;
  kf.odom_from_parent = new_from_prev;
  kf.from_parent = new_from_prev;
  return kf;
}

Pose absolute_pose(const Pose& kf_pose_world, const Pose& frame_from_kf) {
  return kf_pose_world * frame_from_kf.inverse();
}

void Archive::push(Keyframe kf) {
  if (!kfs_.empty() && kf.id <= kfs_.back().id) {
    throw ConfigError("keyframe ids must be strictly increasing");
  }
  kfs_.push_back(std::move(kf));
}

void Archive::prune(int current_frame, int window_frames) {
  while (kfs_.size() > 1 && current_frame - kfs_.front().frame_index > window_frames) {
    kfs_.pop_front();
  }
}

Keyframe* Archive::find(int id) {
  auto it = std::lower_bound(kfs_.begin(), kfs_.end(), id,
                             [](const Keyframe& k, int v) { return k.id < v; });
  return it != kfs_.end() && it->id == id ? &*it : nullptr;
}

const Keyframe* Archive::find(int id) const {
  return const_cast<Archive*>(this)->find(id);
}

}  // namespace egovo
