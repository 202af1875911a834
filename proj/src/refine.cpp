#include "egovo/refine.hpp"

#include "egovo/errors.hpp"

namespace egovo {

RefineResult reinit_translations(const Tracker& tracker, const std::vector<RefineCamera>& cams,
                                 const Pose& anchor_world) {
  RefineResult out;
  if (cams.empty()) return out;
  out.pose_world.push_back(anchor_world);
  out.from_parent.push_back(Pose::identity());
  out.reports.push_back({cams[0].id, false, false, 0.0, 0.0});

  for (size_t k = 1; k < cams.size(); ++k) {
    const RefineCamera& cam = cams[k];
    const Pose& parent_world = out.pose_world[k - 1];
    const Rotation world_from_cam = cam.world_to_cam.inverse();
    const Rotation from_parent_rot = Rotation::from_matrix_unchecked(
        cam.world_to_cam.matrix() * parent_world.r.matrix());
    Pose rel(from_parent_rot, cam.from_parent.t);

    RefineCameraReport rep;
    rep.id = cam.id;
    if (cam.parent_ref && cam.image) {
      const RefineStep step = tracker.refine_translation(*cam.parent_ref, *cam.image, rel);
      rep.refined = true;
      rep.accepted = step.accepted;
      rep.error_before = step.error_before;
      rep.error_after = step.error_after;
      rel = step.pose;
    }
    // parent_from_cam translation, expressed in the world.
    const Vec3 t_parent_from_cam = -(from_parent_rot.matrix().transpose() * rel.t);
    out.pose_world.emplace_back(world_from_cam,
                                parent_world.t + parent_world.r.matrix() * t_parent_from_cam);
    out.from_parent.push_back(rel);
    out.reports.push_back(rep);
  }
  return out;
}

}  // namespace egovo
