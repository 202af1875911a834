#include <gtest/gtest.h>

#include "egovo/geometry.hpp"
#include "test_util.hpp"

using namespace egovo;
using namespace egovo::test;

TEST(Geometry, ExpOfZeroIsIdentity) {
  EXPECT_TRUE(exp_so3(Vec3::Zero()).matrix().isApprox(Mat3::Identity(), 0.0));
}

TEST(Geometry, QuarterTurnAboutZ) {
  Mat3 expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Rotation r = exp_so3(Vec3(0, 0, kPi / 2));
  EXPECT_LT((r.matrix() - expected).norm(), 1e-12);
  EXPECT_LT((log_so3(r) - Vec3(0, 0, kPi / 2)).norm(), 1e-12);
  EXPECT_LT(log_so3(Rotation()).norm(), 1e-15);
}

TEST(Geometry, ExpLogRoundTrip) {
  std::mt19937_64 rng(11);
  for (int n = 0; n < 1000; ++n) {
    const RotVec w = random_rotvec(rng, kPi - 1e-6);
    const Rotation r = exp_so3(w);
    EXPECT_LT(r.orthonormality_error(), 1e-9);
    EXPECT_NEAR(r.matrix().determinant(), 1.0, 1e-9);
    EXPECT_LT((log_so3(r) - w).norm(), 1e-9) << "sample " << n;
    EXPECT_LT((exp_so3(log_so3(r)).matrix() - r.matrix()).norm(), 1e-9);
    EXPECT_TRUE((exp_so3(w) * exp_so3(-w)).matrix().isIdentity(1e-12));
  }
}

TEST(Geometry, LogNearIdentityAndNearPi) {
  const Vec3 tiny(1e-10, -2e-10, 3e-11);
  EXPECT_LT((log_so3(exp_so3(tiny)) - tiny).norm(), 1e-18);
  for (const Vec3& axis : {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 2, 3).normalized()}) {
    const Rotation r = exp_so3(axis * kPi);
    const Vec3 w = log_so3(r);
    EXPECT_NEAR(w.norm(), kPi, 1e-9);
    EXPECT_LT((exp_so3(w).matrix() - r.matrix()).norm(), 1e-9);
  }
}

TEST(Geometry, Se3RoundTrip) {
  EXPECT_TRUE(exp_se3(Twist()).t.isZero(0.0));
  const Pose p = exp_se3(Twist(Vec3::Zero(), Vec3(1, 2, 3)));
  EXPECT_TRUE(p.r.matrix().isIdentity(0.0));
  EXPECT_LT((p.t - Vec3(1, 2, 3)).norm(), 1e-15);

  std::mt19937_64 rng(12);
  for (int n = 0; n < 1000; ++n) {
    const Twist x(random_rotvec(rng, kPi - 1e-6), random_vec(rng, 5.0));
    const Twist y = log_se3(exp_se3(x));
    EXPECT_LT((y.vector() - x.vector()).norm(), 1e-9) << "sample " << n;
  }
}

TEST(Geometry, PoseAlgebra) {
  std::mt19937_64 rng(13);
  for (int n = 0; n < 100; ++n) {
    const Pose a = random_pose(rng, kPi, 3.0), b = random_pose(rng, kPi, 3.0),
               c = random_pose(rng, kPi, 3.0);
    const Pose l = (a * b) * c, r = a * (b * c);
    EXPECT_LT((l.r.matrix() - r.r.matrix()).norm(), 1e-12);
    EXPECT_LT((l.t - r.t).norm(), 1e-12);
    const Pose id = a * a.inverse();
    EXPECT_LT((id.r.matrix() - Mat3::Identity()).norm(), 1e-12);
    EXPECT_LT(id.t.norm(), 1e-12);
    const Vec3 x = random_vec(rng, 2.0);
    EXPECT_LT(((a * b) * x - a * (b * x)).norm(), 1e-12);
  }
}

TEST(Geometry, RotDistanceAxioms) {
  EXPECT_EQ(rot_distance(Rotation(), Rotation()), 0.0);
  EXPECT_NEAR(rot_distance(Rotation(), Rotation::about_z(kPi / 2)), kPi / 2, 1e-12);
  for (double theta : {0.1, 1.0, 3.0}) {
    EXPECT_NEAR(rot_distance(Rotation(), Rotation::about_x(theta)), theta, 1e-9);
    EXPECT_NEAR(rot_distance(Rotation(), exp_so3(Vec3(1, -1, 2).normalized() * theta)), theta, 1e-9);
  }
  std::mt19937_64 rng(14);
  for (int n = 0; n < 100; ++n) {
    const Rotation a = random_rotation(rng), b = random_rotation(rng), c = random_rotation(rng);
    EXPECT_NEAR(rot_distance(a, b), rot_distance(b, a), 1e-10);
    EXPECT_NEAR(rot_distance(a, a), 0.0, 1e-7);
    EXPECT_LE(rot_distance(a, c), rot_distance(a, b) + rot_distance(b, c) + 1e-9);
    EXPECT_GE(rot_distance(a, b), 0.0);
    EXPECT_NEAR(rot_distance(a, b), rotation_angle(b * a.inverse()), 1e-9);
  }
}

TEST(Geometry, ViewVector) {
  EXPECT_LT((view_vector(Pose::identity()) - Vec3(0, 0, 1)).norm(), 1e-15);
  // Yaw +90 deg about the camera y axis turns the optical axis onto +x.
  const Pose yawed(Rotation::about_y(kPi / 2), Vec3(1, 2, 3));
  EXPECT_LT((view_vector(yawed) - Vec3(1, 0, 0)).norm(), 1e-12);
  std::mt19937_64 rng(15);
  for (int n = 0; n < 100; ++n) {
    EXPECT_NEAR(view_vector(random_pose(rng, kPi, 1.0)).norm(), 1.0, 1e-12);
  }
  EXPECT_NEAR(angle_between(Vec3(1, 0, 0), Vec3(0, 2, 0)), kPi / 2, 1e-12);
}

TEST(Geometry, FromMatrixReorthonormalises) {
  Mat3 m = Rotation::about_z(0.3).matrix();
  m(0, 1) += 1e-6;
  const Rotation r = Rotation::from_matrix(m);
  EXPECT_LT(r.orthonormality_error(), 1e-12);
  EXPECT_NEAR(r.matrix().determinant(), 1.0, 1e-12);
  const Mat3 exact = Rotation::about_z(0.3).matrix();
  EXPECT_TRUE(Rotation::from_matrix(exact).matrix() == exact);
}
