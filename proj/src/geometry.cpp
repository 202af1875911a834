#include "egovo/geometry.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace egovo {

namespace {

constexpr double kSmallAngle = 1e-8;
constexpr double kOrthoTolerance = 1e-9;

Vec3 vee_antisymmetric(const Mat3& m) {
  return 0.5 * Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

Mat3 project_to_so3(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

}  // namespace

Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<    0.0, -v.z(),  v.y(),
        v.z(),    0.0, -v.x(),
       -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

Rotation Rotation::from_matrix(const Mat3& m) {
  Rotation r(m);
  if (r.orthonormality_error() > kOrthoTolerance || m.determinant() < 0.0) {
    r.m_ = project_to_so3(m);
  }
  return r;
}

Rotation Rotation::about_x(double a) { return exp_so3(Vec3(a, 0.0, 0.0)); }
Rotation Rotation::about_y(double a) { return exp_so3(Vec3(0.0, a, 0.0)); }
Rotation Rotation::about_z(double a) { return exp_so3(Vec3(0.0, 0.0, a)); }

Rotation Rotation::operator*(const Rotation& o) const {
  Rotation r(m_ * o.m_);
  if (r.orthonormality_error() > kOrthoTolerance) r.m_ = project_to_so3(r.m_);
  return r;
}

double Rotation::orthonormality_error() const {
  return (m_.transpose() * m_ - Mat3::Identity()).norm();
}

Pose Pose::inverse() const {
  const Rotation ri = r.inverse();
  return {ri, -(ri * t)};
}

Pose Pose::operator*(const Pose& o) const { return {r * o.r, r * o.t + t}; }

Rotation exp_so3(const RotVec& w) {
  const double theta2 = w.squaredNorm();
  const double theta = std::sqrt(theta2);
  const Mat3 k = skew(w);
  double a, b;
  if (theta < 1e-6) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Rotation::from_matrix(Mat3::Identity() + a * k + b * k * k);
}

RotVec log_so3(const Rotation& r) {
  const Mat3& m = r.matrix();
  const Vec3 v = vee_antisymmetric(m);
  const double s = v.norm();
  const double c = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
  const double theta = std::atan2(s, c);

  if (theta < kSmallAngle) return v * (1.0 + s * s / 6.0);
  if (c > -0.99) return v * (theta / s);

  // Near pi: recover the axis from the symmetric part (1 - c) a a^T.
  const Mat3 sym = 0.5 * (m + m.transpose()) - c * Mat3::Identity();
  int k = 0;
  sym.diagonal().maxCoeff(&k);
  const double one_minus_c = 1.0 - c;
  Vec3 axis;
  axis[k] = std::sqrt(std::max(sym(k, k), 0.0) / one_minus_c);
  for (int j = 0; j < 3; ++j) {
    if (j != k) axis[j] = sym(j, k) / (one_minus_c * axis[k]);
  }
  axis.normalize();
  if (s > 1e-12 && axis.dot(v) < 0.0) axis = -axis;
  return theta * axis;
}

namespace {

// Coefficients of V = I + b K + c K^2 (K = skew(w)).
void v_coefficients(double theta, double& b, double& c) {
  const double theta2 = theta * theta;
  if (theta < 1e-5) {
    b = 0.5 - theta2 / 24.0;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    b = (1.0 - std::cos(theta)) / theta2;
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }
}

}  // namespace

Pose exp_se3(const Twist& x) {
  const double theta = x.w.norm();
  double b, c;
  v_coefficients(theta, b, c);
  const Mat3 k = skew(x.w);
  const Mat3 v = Mat3::Identity() + b * k + c * k * k;
  return {exp_so3(x.w), v * x.v};
}

Twist log_se3(const Pose& p) {
  const Vec3 w = log_so3(p.r);
  const double theta = w.norm();
  const Mat3 k = skew(w);
  double d;
  if (theta < 1e-5) {
    d = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    const double half = 0.5 * theta;
    d = (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
  }
  const Mat3 v_inv = Mat3::Identity() - 0.5 * k + d * k * k;
  return {w, v_inv * p.t};
}

double rotation_angle(const Rotation& r) {
  const Mat3& m = r.matrix();
  const double s = vee_antisymmetric(m).norm();
  const double c = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
  return std::atan2(s, c);
}

double rot_distance(const Rotation& r1, const Rotation& r2) {
  return rotation_angle(Rotation::from_matrix_unchecked(r2.matrix() * r1.matrix().transpose()));
}

Vec3 view_vector(const Pose& world_from_camera) {
  return world_from_camera.r.matrix().col(2).normalized();
}

double angle_between(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

}  // namespace egovo
