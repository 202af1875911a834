// Per-frame orchestration: tracking, depth filtering, keyframing, local loop
// closure, windowed rotation averaging, translation re-initialization and
// trajectory bookkeeping, with explicit segments on tracking loss.

#ifndef EGOVO_PIPELINE_HPP
#define EGOVO_PIPELINE_HPP

#include <functional>
#include <set>
#include <vector>

#include "egovo/keyframe_graph.hpp"
#include "egovo/loop_closure.hpp"
#include "egovo/refine.hpp"
#include "egovo/rotavg.hpp"
#include "egovo/tracker.hpp"
#include "egovo/trajectory.hpp"

namespace egovo {

struct PipelineConfig {
  KeyframePolicy policy;
  DepthConfig depth;
  TrackerConfig tracker;
  ClosureConfig closure;
  RotAvgConfig rotavg;
  bool enable_loop_closure = true;
  bool enable_rotavg = true;
  uint64_t seed = 0;
  int pyramid_levels = 0;  // 0 picks from the image size
  std::set<int> inject_loss_frames;  // frames whose tracking is forced to fail
};

/// 4 levels from 320x240 upward, 3 below.
int default_pyramid_levels(int width, int height);

struct ClosureRecord {
  int frame_index = 0;
  int kf_id = 0;
  double kl = 0.0;
  double view_angle = 0.0;  // radians
  bool converged = false;  // aligned and consistent with the odometry prediction
  /// Angle between the closure rotation and the one predicted by the
  /// odometry chain, radians; NaN when the alignment failed.
  double rot_discrepancy = 0.0;
  Rotation rotation;  // frame_from_keyframe when converged
};

struct FrameRecord {
  int frame_index = 0;
  int segment = 0;
  Pose pose;
  bool keyframe = false;
  int kf_id = 0;  // reference keyframe after this frame
  bool lost = false;
  double error = 0.0;
  double valid_fraction = 0.0;
  int iterations = 0;
  int depth_points = 0;
  int closures = 0;  // converged closure edges
  bool averaged = false;
  double avg_cost_before = 0.0;
  double avg_cost_after = 0.0;
  int window_nodes = 0;
};

/// Called with the inputs and outputs of every translation re-initialization.
using RefineObserver =
    std::function<void(const std::vector<RefineCamera>&, const Pose&, const RefineResult&)>;

class Pipeline {
 public:
  Pipeline(const Intrinsics& k, PipelineConfig cfg);

  const FrameRecord& process_frame(const GrayImage& image);

  const Trajectory& trajectory() const { return traj_; }
  const std::vector<FrameRecord>& records() const { return records_; }
  const std::vector<ClosureRecord>& closures() const { return closure_log_; }
  const Archive& archive() const { return archive_; }
  int frames_processed() const { return next_frame_; }
  int segment() const { return segment_; }

  void set_refine_observer(RefineObserver obs) { observer_ = std::move(obs); }

 private:
  struct Link {
    int ref_kf = 0;
    Pose rel;  // frame_from_keyframe
  };

  void start_segment(const Pyramid& pyr, FrameRecord& rec);
  void search_closures(const Pyramid& pyr, Pose& pose_world, FrameRecord& rec);
  uint64_t frame_seed(int frame) const;

  Intrinsics k_;
  PipelineConfig cfg_;
  int levels_;
  Tracker tracker_;

  Archive archive_;
  MotionPrior prior_;
  Trajectory traj_;
  std::vector<Link> links_;  // parallel to the current segment's entries
  size_t segment_begin_ = 0;
  std::vector<RelRotEdge> stored_edges_;  // keyframe-to-keyframe closures
  std::vector<FrameRecord> records_;
  std::vector<ClosureRecord> closure_log_;
  RefineObserver observer_;

  int next_frame_ = 0;
  int next_kf_id_ = 0;
  int frames_since_kf_ = 0;
  int segment_ = -1;
};

}  // namespace egovo

#endif  // EGOVO_PIPELINE_HPP
