#include "egovo/loop_closure.hpp"

#include <algorithm>
#include <unordered_set>

#include "egovo/errors.hpp"

namespace egovo {

std::vector<ClosureCandidate> find_candidates(const IntensityHistogram& frame_hist,
                                              const Vec3& frame_view, const Archive& archive,
                                              const ClosureConfig& cfg) {
  std::vector<ClosureCandidate> out;
  const auto& kfs = archive.keyframes();
  const int searchable = static_cast<int>(kfs.size()) - cfg.exclude_recent;
  for (int k = 0; k < searchable; ++k) {
    const Keyframe& kf = kfs[k];
    const double kl = kl_divergence(frame_hist, kf.hist);
    if (kl > cfg.kl_threshold) continue;
    const double angle = angle_between(frame_view, view_vector(kf.pose_world));
    if (angle > cfg.view_angle_max) continue;
    out.push_back({kf.id, kl, angle});
  }
  std::sort(out.begin(), out.end(), [](const ClosureCandidate& a, const ClosureCandidate& b) {
    return a.kl != b.kl ? a.kl < b.kl : a.kf_id < b.kf_id;
  });
  if (static_cast<int>(out.size()) > cfg.max_candidates) out.resize(cfg.max_candidates);
  return out;
}

std::optional<ClosureResult> close_loop(const Tracker& tracker, const Keyframe& candidate,
                                        const Pyramid& frame, const Pose& init, int frame_node) {
  TrackResult tr;
  try {
    tr = tracker.track(candidate.pyramid, candidate.depth, frame, init);
  } catch (const TrackingLost&) {
    return std::nullopt;
  }
  if (!tr.converged) return std::nullopt;
  ClosureResult out;
  out.edge.i = candidate.id;
  out.edge.j = frame_node;
  out.edge.r_ij = tr.pose.r;
  out.edge.kind = EdgeKind::kClosure;
  out.edge.weight = tr.valid_pixel_fraction;
  out.track = tr;
  return out;
}

std::optional<ViewGraph> build_window_graph(const std::vector<RelRotEdge>& closures,
                                            const std::vector<ChainNode>& chain) {
  if (closures.empty() || chain.empty()) return std::nullopt;
  int start_id = closures.front().i;
  for (const auto& e : closures) start_id = std::min(start_id, std::min(e.i, e.j));
  const auto first = std::find_if(chain.begin(), chain.end(),
                                  [&](const ChainNode& c) { return c.id >= start_id; });
  if (first == chain.end()) return std::nullopt;

  ViewGraph g;
  std::unordered_set<int> members;
  for (auto it = first; it != chain.end(); ++it) {
    g.ids.push_back(it->id);
    g.rotations.push_back(it->world_to_cam);
    members.insert(it->id);
    if (it != first) {
      RelRotEdge e;
      e.i = std::prev(it)->id;
      e.j = it->id;
      e.r_ij = it->from_prev;
      e.kind = EdgeKind::kSequential;
      g.edges.push_back(e);
    }
  }
  for (const auto& e : closures) {
    if (members.count(e.i) && members.count(e.j)) g.edges.push_back(e);
  }
  return g;
}

}  // namespace egovo
