// Short local loop closures: archived keyframes that look the same way as
// the current frame (similar intensity histogram, close view vectors) are
// re-aligned against it to produce extra relative-rotation edges.

#ifndef EGOVO_LOOP_CLOSURE_HPP
#define EGOVO_LOOP_CLOSURE_HPP

#include <optional>
#include <vector>

#include "egovo/keyframe_graph.hpp"
#include "egovo/rotavg.hpp"
#include "egovo/tracker.hpp"

namespace egovo {

struct ClosureConfig {
  double kl_threshold = 0.15;
  double view_angle_max = 15.0 * 3.14159265358979323846 / 180.0;
  int exclude_recent = 2;
  int max_candidates = 3;
  /// Closure rotations further than this from the odometry prediction are
  /// treated as false matches.
  double max_discrepancy = 5.0 * 3.14159265358979323846 / 180.0;
};

struct ClosureCandidate {
  int kf_id = 0;
  double kl = 0.0;
  double view_angle = 0.0;  // radians
};

/// Candidates sorted by divergence (ties by id), at most max_candidates.
std::vector<ClosureCandidate> find_candidates(const IntensityHistogram& frame_hist,
                                              const Vec3& frame_view, const Archive& archive,
                                              const ClosureConfig& cfg);

struct ClosureResult {
  RelRotEdge edge;
  TrackResult track;
};

/// Aligns `frame` against `candidate` starting from `init`
/// (frame_from_candidate). Yields an edge (candidate -> frame_node) carrying
/// the rotation only, weighted by the in-view fraction, when the alignment
/// converges; nullopt when it is lost or does not converge.
std::optional<ClosureResult> close_loop(const Tracker& tracker, const Keyframe& candidate,
                                        const Pyramid& frame, const Pose& init, int frame_node);

/// A camera in the odometry chain, in chain order.
struct ChainNode {
  int id = 0;
  Rotation world_to_cam;
  Rotation from_prev;  // measured rotation relative to the previous chain node
};

/// Window graph spanning the chain from the earliest closure endpoint to the
/// end: sequential edges between consecutive chain nodes plus every closure
/// edge with both endpoints inside. nullopt without closures.
std::optional<ViewGraph> build_window_graph(const std::vector<RelRotEdge>& closures,
                                            const std::vector<ChainNode>& chain);

}  // namespace egovo

#endif  // EGOVO_LOOP_CLOSURE_HPP
