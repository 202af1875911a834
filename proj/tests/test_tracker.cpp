#include <gtest/gtest.h>

#include "egovo/errors.hpp"
#include "egovo/tracker.hpp"
#include "test_util.hpp"

using namespace egovo;
using namespace egovo::test;

namespace {

struct Fixture {
  SceneSpec scene = plane_scene(2.0);
  RenderedFrame kf_frame = render(scene, Pose::identity(), 0);
  Pyramid kf = build_pyramid(kf_frame.image, 3);
  InverseDepthMap depth = gt_depth_map(kf_frame, kf.level(0));
  Tracker tracker{scene.intrinsics, TrackerConfig{}};

  Pyramid frame_at(const Pose& world_from_cam) const {
    return build_pyramid(render(scene, world_from_cam, 0).image, 3);
  }
};

double trans_rel_error(const Pose& est, const Pose& truth) {
  return (est.t - truth.t).norm() / truth.t.norm();
}

}  // namespace

TEST(Tracker, SelfAlignmentIsIdentity) {
  Fixture f;
  const TrackResult r = f.tracker.track(f.kf, f.depth, f.kf, Pose::identity());
  EXPECT_LT(log_se3(r.pose).norm(), 1e-6);
  EXPECT_LT(r.final_error, 1e-12);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.valid_pixel_fraction, 1.0, 1e-12);
  EXPECT_EQ(r.iterations_per_level.size(), 3u);
}

TEST(Tracker, RecoversYawAndTranslation) {
  Fixture f;
  const Pose world_from_frame(Rotation::about_y(5 * kDeg), Vec3(0.08, 0.03, 0.06));
  const Pose truth = world_from_frame.inverse();
  const TrackResult r = f.tracker.track(f.kf, f.depth, f.frame_at(world_from_frame), Pose::identity());
  EXPECT_TRUE(r.converged);
  EXPECT_LT(rot_distance(r.pose.r, truth.r), 0.2 * kDeg);
  EXPECT_LT(trans_rel_error(r.pose, truth), 0.02);
  EXPECT_GE(r.final_error, 0.0);
  EXPECT_GT(r.valid_pixel_fraction, 0.3);
  EXPECT_LE(r.valid_pixel_fraction, 1.0);
}

TEST(Tracker, GroundTruthInitIsFixedPoint) {
  Fixture f;
  const Pose world_from_frame(Rotation::about_y(-3 * kDeg), Vec3(-0.05, 0.0, 0.1));
  const Pose truth = world_from_frame.inverse();
  const Pyramid frame = f.frame_at(world_from_frame);
  const TrackResult from_identity = f.tracker.track(f.kf, f.depth, frame, Pose::identity());
  const TrackResult from_truth = f.tracker.track(f.kf, f.depth, frame, truth);
  for (int it : from_truth.iterations_per_level) EXPECT_LE(it, 2);
  EXPECT_LE(from_truth.final_error, from_identity.final_error + 1e-9);
  EXPECT_LT(rot_distance(from_truth.pose.r, truth.r), 0.05 * kDeg);
}

TEST(Tracker, MotionPrior) {
  Fixture f;
  MotionPrior prior;
  EXPECT_FALSE(prior.valid);
  EXPECT_LT(log_se3(prior.predict()).norm(), 1e-15);

  // Stationary: the prior predicts the identity.
  prior.update(Pose::identity());
  prior.update(Pose::identity());
  const Pyramid same = f.frame_at(Pose::identity());
  const TrackResult a = f.tracker.track_with_motion_prior(f.kf, f.depth, same, prior);
  const TrackResult b = f.tracker.track(f.kf, f.depth, same, Pose::identity());
  EXPECT_EQ(a.pose.t, b.pose.t);
  EXPECT_EQ(a.iterations_per_level, b.iterations_per_level);

  // After a loss the prior is reset and tracking is identity-initialized.
  prior.update(Pose(Rotation::about_y(0.1), Vec3(0.3, 0, 0)));
  prior.reset();
  const Pyramid moved = f.frame_at(Pose(Rotation::about_y(1 * kDeg), Vec3(0.01, 0, 0.02)));
  const TrackResult c = f.tracker.track_with_motion_prior(f.kf, f.depth, moved, prior);
  const TrackResult d = f.tracker.track(f.kf, f.depth, moved, Pose::identity());
  EXPECT_TRUE(c.pose.r == d.pose.r);
  EXPECT_EQ(c.pose.t, d.pose.t);
  EXPECT_EQ(c.total_iterations(), d.total_iterations());
}

TEST(Tracker, ConstantVelocityNeedsFewerIterations) {
  Fixture f;
  MotionPrior prior;
  int with_prior = 0, without = 0;
  for (int t = 1; t <= 8; ++t) {
    const Pose world_from_frame(Rotation::about_y(0.6 * kDeg * t), Vec3(0.004 * t, 0, 0.012 * t));
    const Pyramid frame = f.frame_at(world_from_frame);
    const TrackResult p = f.tracker.track_with_motion_prior(f.kf, f.depth, frame, prior);
    const TrackResult q = f.tracker.track(f.kf, f.depth, frame, Pose::identity());
    EXPECT_LT(rot_distance(p.pose.r, world_from_frame.inverse().r), 0.1 * kDeg);
    with_prior += p.total_iterations();
    without += q.total_iterations();
    prior.update(p.pose);
  }
  EXPECT_LE(with_prior, 0.8 * without) << with_prior << " vs " << without;
}

TEST(Tracker, JacobianMatchesFiniteDifferences) {
  Fixture f;
  const TrackingReference ref = make_reference(f.kf, f.depth, f.scene.intrinsics);
  const Pyramid frame = f.frame_at(Pose(Rotation::about_y(2 * kDeg), Vec3(0.03, 0.01, 0.02)));
  const Pose pose(Rotation::about_y(-1.7 * kDeg), Vec3(-0.02, -0.005, -0.01));
  const auto terms = f.tracker.residual_terms(ref, 0, frame.level(0), pose);
  ASSERT_GT(terms.size(), 1000u);
  const double h = 1e-6;
  int checked = 0, agree = 0;
  for (size_t n = 0; n < terms.size(); n += 37) {
    const ResidualTerm& t = terms[n];
    Row6 fd;
    bool ok = true;
    for (int c = 0; c < 6 && ok; ++c) {
      Vec6 d = Vec6::Zero();
      d(c) = h;
      std::vector<ReferencePoint> one{ref.levels[0][t.point]};
      TrackingReference single;
      single.levels = {one};
      const auto plus = f.tracker.residual_terms(single, 0, frame.level(0), exp_se3(Twist(d)) * pose);
      const auto minus =
          f.tracker.residual_terms(single, 0, frame.level(0), exp_se3(Twist(Vec6(-d))) * pose);
      if (plus.size() != 1 || minus.size() != 1) {
        ok = false;
        break;
      }
      fd(c) = (plus[0].residual - minus[0].residual) / (2 * h);
    }
    if (!ok) continue;
    ++checked;
    agree += (fd - t.jacobian).norm() <= 1e-3 * std::max(t.jacobian.norm(), 1e-3);
  }
  ASSERT_GT(checked, 30);
  // Samples straddling a bilinear cell boundary may see a kink.
  EXPECT_GE(agree, 0.95 * checked);
}

TEST(Tracker, ErrorIsZeroAtTruthWithoutNoise) {
  Fixture f;
  const TrackingReference ref = make_reference(f.kf, f.depth, f.scene.intrinsics);
  double frac = 0.0;
  EXPECT_LT(f.tracker.error(ref, 0, f.kf.level(0), Pose::identity(), &frac), 1e-15);
  EXPECT_NEAR(frac, 1.0, 1e-12);
}

TEST(Tracker, LostWithoutDepthOrOverlap) {
  Fixture f;
  const InverseDepthMap empty(f.kf.level(0).image.width(), f.kf.level(0).image.height());
  EXPECT_THROW(f.tracker.track(f.kf, empty, f.kf, Pose::identity()), TrackingLost);
  const Pyramid flat = build_pyramid(GrayImage(160, 120, 0.5f), 3);
  EXPECT_THROW(f.tracker.track(f.kf, f.depth, flat, Pose::identity()), TrackingLost);
  EXPECT_THROW(f.tracker.track(f.kf, f.depth, f.kf, Pose(Rotation(), Vec3(5, 0, 0))), TrackingLost);
}

TEST(Tracker, RefineTranslationKeepsRotation) {
  Fixture f;
  const TrackingReference ref = make_reference(f.kf, f.depth, f.scene.intrinsics);
  const Pose world_from_frame(Rotation::about_y(1 * kDeg), Vec3(0.02, 0, 0.03));
  const Pyramid frame = f.frame_at(world_from_frame);
  Pose init = world_from_frame.inverse();
  init.t += Vec3(0.01, -0.005, 0.01);
  const RefineStep s = f.tracker.refine_translation(ref, frame.level(0), init);
  EXPECT_TRUE(s.pose.r == init.r);
  EXPECT_TRUE(s.accepted);
  EXPECT_LT(s.error_after, s.error_before);
  EXPECT_LT((s.pose.t - world_from_frame.inverse().t).norm(), (init.t - world_from_frame.inverse().t).norm());
}
