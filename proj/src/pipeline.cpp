#include "egovo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "egovo/errors.hpp"

namespace egovo {

int default_pyramid_levels(int width, int height) {
  return width >= 320 && height >= 240 ? 4 : 3;
}

Pipeline::Pipeline(const Intrinsics& k, PipelineConfig cfg)
    : k_(k),
      cfg_(std::move(cfg)),
      levels_(cfg_.pyramid_levels > 0 ? cfg_.pyramid_levels
                                      : default_pyramid_levels(k.width, k.height)),
      tracker_(k, cfg_.tracker) {
  if (cfg_.policy.keyframe_every < 1) throw ConfigError("keyframe_every must be at least 1");
  if (cfg_.policy.window_frames < 1) throw ConfigError("window_frames must be at least 1");
}

uint64_t Pipeline::frame_seed(int frame) const {
  uint64_t x = cfg_.seed * 0x9e3779b97f4a7c15ULL + static_cast<uint64_t>(frame) + 1;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void Pipeline::start_segment(const Pyramid& pyr, FrameRecord& rec) {
  const int f = rec.frame_index;
  ++segment_;
  archive_.clear();
  stored_edges_.clear();
  prior_.reset();
  archive_.push(initial_keyframe(pyr, f, next_kf_id_++, cfg_.depth, frame_seed(f)));
  frames_since_kf_ = 0;
  segment_begin_ = traj_.entries.size();
  links_.clear();
  traj_.entries.push_back({f, Pose::identity(), segment_, kTracked});
  links_.push_back({archive_.back().id, Pose::identity()});
  rec.keyframe = true;
}

const FrameRecord& Pipeline::process_frame(const GrayImage& image) {
  if (image.width() != k_.width || image.height() != k_.height) {
    throw ConfigError("frame size does not match the calibration");
  }
  FrameRecord rec;
  rec.frame_index = next_frame_++;
  const int f = rec.frame_index;
  const Pyramid pyr = build_pyramid(image, levels_);

  bool lost = archive_.empty();
  TrackResult tr;
  if (!lost && cfg_.inject_loss_frames.count(f)) {
    lost = true;
    rec.lost = true;
  }
  if (!lost) {
    try {
      const Keyframe& kf = archive_.back();
      tr = tracker_.track_with_motion_prior(kf.pyramid, kf.depth, pyr, prior_);
    } catch (const TrackingLost&) {
      lost = true;
      rec.lost = true;
    }
  }

  if (lost) {
    start_segment(pyr, rec);
  } else {
    Keyframe& kf = archive_.back();
    Pose pose_world = absolute_pose(kf.pose_world, tr.pose);
    prior_.update(tr.pose);
    kf.depth = stereo_update(kf.pyramid.level(0), kf.depth, pyr.level(0), tr.pose, k_, cfg_.depth);
    ++frames_since_kf_;
    Link link{kf.id, tr.pose};

    if (should_create_keyframe(frames_since_kf_, tr.valid_pixel_fraction, cfg_.policy)) {
      Keyframe nk = create_keyframe(kf, pyr, tr.pose, f, next_kf_id_++, k_, cfg_.depth, cfg_.policy,
                                    frame_seed(f));
      pose_world = nk.pose_world;
      link = {nk.id, Pose::identity()};
      archive_.push(std::move(nk));
      archive_.prune(f, cfg_.policy.window_frames);
      stored_edges_.erase(std::remove_if(stored_edges_.begin(), stored_edges_.end(),
                                         [&](const RelRotEdge& e) {
                                           return !archive_.find(e.i) || !archive_.find(e.j);
                                         }),
                          stored_edges_.end());
      prior_.rebase();
      frames_since_kf_ = 0;
      rec.keyframe = true;
    }
    traj_.entries.push_back({f, pose_world, segment_, kTracked});
    links_.push_back(link);

    rec.error = tr.final_error;
    rec.valid_fraction = tr.valid_pixel_fraction;
    rec.iterations = tr.total_iterations();
    if (cfg_.enable_loop_closure) search_closures(pyr, pose_world, rec);
  }

  rec.segment = segment_;
  rec.pose = traj_.entries.back().pose;
  rec.kf_id = archive_.back().id;
  rec.depth_points = archive_.back().depth.valid_count();
  records_.push_back(rec);
  return records_.back();
}

void Pipeline::search_closures(const Pyramid& pyr, Pose& pose_world, FrameRecord& rec) {
  const bool is_kf = rec.keyframe;
  const Keyframe& cur = archive_.back();
  const IntensityHistogram hist = is_kf ? cur.hist : histogram(pyr.level(0).image);
  const std::vector<ClosureCandidate> cands =
      find_candidates(hist, view_vector(pose_world), archive_, cfg_.closure);
  if (cands.empty()) return;

  // A closing frame that is not a keyframe gets an id above every keyframe.
  const int frame_node = is_kf ? cur.id : next_kf_id_;
  std::vector<RelRotEdge> fresh;
  for (const auto& c : cands) {
    const Keyframe* ck = archive_.find(c.kf_id);
    const Pose init = pose_world.inverse() * ck->pose_world;
    const auto res = close_loop(tracker_, *ck, pyr, init, frame_node);
    ClosureRecord cr{rec.frame_index, c.kf_id, c.kl, c.view_angle, false,
                     std::numeric_limits<double>::quiet_NaN(), Rotation()};
    if (res) {
      cr.rot_discrepancy = rot_distance(res->edge.r_ij, init.r);
      cr.rotation = res->edge.r_ij;
      cr.converged = cr.rot_discrepancy <= cfg_.closure.max_discrepancy;
      if (cr.converged) fresh.push_back(res->edge);
    }
    closure_log_.push_back(cr);
  }
  rec.closures = static_cast<int>(fresh.size());
  if (fresh.empty()) return;

  const size_t stored_before = stored_edges_.size();
  const Link& cur_link = links_.back();
  for (const auto& e : fresh) {
    RelRotEdge s = e;
    if (!is_kf) {
      s.j = cur.id;
      s.r_ij = cur_link.rel.r.inverse() * e.r_ij;
    }
    if (s.i < s.j) stored_edges_.push_back(s);
  }
  if (!cfg_.enable_rotavg) return;

  int start = fresh.front().i;
  for (const auto& e : fresh) start = std::min(start, e.i);
  std::vector<RelRotEdge> edges = fresh;
  for (size_t n = 0; n < stored_before; ++n) {
    if (stored_edges_[n].i >= start) edges.push_back(stored_edges_[n]);
  }

  std::vector<ChainNode> chain;
  for (const auto& kf : archive_.keyframes()) {
    chain.push_back({kf.id, kf.pose_world.r.inverse(), kf.odom_from_parent.r});
  }
  if (!is_kf) chain.push_back({frame_node, pose_world.r.inverse(), cur_link.rel.r});

  const auto graph = build_window_graph(edges, chain);
  if (!graph) return;
  AveragingResult avg;
  try {
    avg = average_rotations(*graph, cfg_.rotavg);
  } catch (const ConfigError&) {
    return;
  }
  if (avg.report.solver_failed) return;
  rec.averaged = true;
  rec.avg_cost_before = avg.report.initial_cost;
  rec.avg_cost_after = avg.report.final_cost;
  rec.window_nodes = static_cast<int>(graph->ids.size());

  const size_t n = graph->ids.size();
  std::vector<TrackingReference> refs(n);
  std::vector<RefineCamera> cams(n);
  std::unordered_set<int> window;
  for (size_t idx = 0; idx < n; ++idx) {
    const int id = graph->ids[idx];
    window.insert(id);
    RefineCamera& c = cams[idx];
    c.id = id;
    c.world_to_cam = avg.rotations[idx];
    if (id == frame_node && !is_kf) {
      c.from_parent = cur_link.rel;
      c.image = &pyr.level(0);
    } else {
      const Keyframe* kf = archive_.find(id);
      c.from_parent = kf->from_parent;
      c.image = &kf->pyramid.level(0);
    }
    if (idx > 0) {
      const Keyframe* parent = archive_.find(graph->ids[idx - 1]);
      refs[idx] = make_reference(parent->pyramid, parent->depth, k_);
      c.parent_ref = &refs[idx];
    }
  }
  const Pose anchor_world = archive_.find(graph->ids[0])->pose_world;
  const RefineResult refined = reinit_translations(tracker_, cams, anchor_world);
  if (observer_) observer_(cams, anchor_world, refined);

  for (size_t idx = 0; idx < n; ++idx) {
    const int id = graph->ids[idx];
    if (id == frame_node && !is_kf) continue;
    Keyframe* kf = archive_.find(id);
    kf->pose_world = refined.pose_world[idx];
    if (idx > 0) kf->from_parent = refined.from_parent[idx];
  }
  const size_t last = traj_.entries.size() - 1;
  for (size_t e = segment_begin_; e <= last; ++e) {
    Link& l = links_[e - segment_begin_];
    if (!window.count(l.ref_kf)) continue;
    TrajectoryEntry& entry = traj_.entries[e];
    if (e == last && !is_kf) {
      l.rel = refined.from_parent.back();
      entry.pose = refined.pose_world.back();
    } else {
      entry.pose = absolute_pose(archive_.find(l.ref_kf)->pose_world, l.rel);
    }
    entry.flags |= kClosureCorrected;
  }
  pose_world = traj_.entries.back().pose;
  prior_.last_rel = links_.back().rel;
}

}  // namespace egovo
