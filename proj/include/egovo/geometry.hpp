// SO(3) / SE(3) machinery: exponential and logarithm maps, composition,
// the geodesic rotation metric and camera view vectors.
//
// Conventions: a camera looks down +z of its own frame with x to the right
// and y down. Absolute (trajectory) poses are world-from-camera.

#ifndef EGOVO_GEOMETRY_HPP
#define EGOVO_GEOMETRY_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace egovo {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

/// Tangent-space rotation (axis * angle, radians).
using RotVec = Vec3;

Mat3 skew(const Vec3& v);

/// Element of SO(3), stored as a 3x3 orthonormal matrix.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  /// Projects `m` onto SO(3) when it drifts more than 1e-9 (Frobenius) from
  /// orthonormality.
  static Rotation from_matrix(const Mat3& m);
  /// Wraps a matrix already known to be a rotation; no projection.
  static Rotation from_matrix_unchecked(const Mat3& m) { return Rotation(m); }
  static Rotation about_x(double angle);
  static Rotation about_y(double angle);
  static Rotation about_z(double angle);

  const Mat3& matrix() const { return m_; }
  Rotation inverse() const { return Rotation(m_.transpose()); }
  Rotation operator*(const Rotation& o) const;
  Vec3 operator*(const Vec3& x) const { return m_ * x; }
  double orthonormality_error() const;

  bool operator==(const Rotation& o) const { return m_ == o.m_; }

 private:
  explicit Rotation(const Mat3& m) : m_(m) {}
  Mat3 m_;
};

/// Rigid transform X' = R X + t.
struct Pose {
  Rotation r;
  Vec3 t = Vec3::Zero();

  Pose() = default;
  Pose(const Rotation& rot, const Vec3& trans) : r(rot), t(trans) {}

  static Pose identity() { return {}; }
  Pose inverse() const;
  Pose operator*(const Pose& o) const;
  Vec3 operator*(const Vec3& x) const { return r * x + t; }
};

/// se(3) coordinates [w, v].
struct Twist {
  Vec3 w = Vec3::Zero();
  Vec3 v = Vec3::Zero();

  Twist() = default;
  Twist(const Vec3& rot, const Vec3& trans) : w(rot), v(trans) {}
  explicit Twist(const Vec6& x) : w(x.head<3>()), v(x.tail<3>()) {}
  Vec6 vector() const {
    Vec6 x;
    x << w, v;
    return x;
  }
  double norm() const { return vector().norm(); }
};

Rotation exp_so3(const RotVec& w);
/// Canonical logarithm, |w| in [0, pi]. At angle pi the axis sign is chosen
/// so that the component with the largest diagonal entry is positive.
RotVec log_so3(const Rotation& r);

Pose exp_se3(const Twist& x);
Twist log_se3(const Pose& p);

/// Geodesic angle between two rotations, (1/sqrt 2) ||log(r2 r1^T)||_F.
double rot_distance(const Rotation& r1, const Rotation& r2);
/// Rotation angle of `r` in [0, pi].
double rotation_angle(const Rotation& r);

/// Optical axis of a world-from-camera pose, in world coordinates.
Vec3 view_vector(const Pose& world_from_camera);

/// Angle between two direction vectors, in [0, pi].
double angle_between(const Vec3& a, const Vec3& b);

}  // namespace egovo

#endif  // EGOVO_GEOMETRY_HPP
