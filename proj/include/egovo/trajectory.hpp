#ifndef EGOVO_TRAJECTORY_HPP
#define EGOVO_TRAJECTORY_HPP

#include <cstdint>
#include <vector>

#include "egovo/geometry.hpp"

namespace egovo {

enum TrajectoryFlag : uint8_t {
  kTracked = 1,
  kInterpolated = 2,
  kClosureCorrected = 4,
};

struct TrajectoryEntry {
  int frame_index = 0;
  Pose pose;  // world_from_camera, world = first keyframe of the segment
  int segment = 0;
  uint8_t flags = 0;
};

/// Frame indices strictly increase; each segment starts at the identity.
struct Trajectory {
  std::vector<TrajectoryEntry> entries;

  size_t size() const { return entries.size(); }
  int num_segments() const;
};

}  // namespace egovo

#endif  // EGOVO_TRAJECTORY_HPP
