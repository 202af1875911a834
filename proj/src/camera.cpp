#include "egovo/camera.hpp"

#include <cmath>
#include <string>

#include "egovo/errors.hpp"

namespace egovo {

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ConfigError("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw ConfigError("image size must be positive");
  if (!(cx > 0.0 && cx < width && cy > 0.0 && cy < height)) {
    throw ConfigError("principal point (" + std::to_string(cx) + ", " + std::to_string(cy) +
                      ") outside the image");
  }
}

Intrinsics Intrinsics::at_level(int level) const {
  const double s = 1.0 / static_cast<double>(1 << level);
  Intrinsics k = *this;
  k.fx = fx * s;
  k.fy = fy * s;
  k.cx = (cx + 0.5) * s - 0.5;
  k.cy = (cy + 0.5) * s - 0.5;
  k.width = width >> level;
  k.height = height >> level;
  return k;
}

Vec3 unproject(const Intrinsics& k, const Pixel& px, double depth) {
  if (!(depth > 0.0)) throw InvalidDepth("depth must be positive, got " + std::to_string(depth));
  return depth * Vec3((px.x - k.cx) / k.fx, (px.y - k.cy) / k.fy, 1.0);
}

Pixel project(const Intrinsics& k, const Vec3& x) {
  if (!(x.z() > 0.0)) throw BehindCamera("point is not in front of the camera");
  return {k.fx * x.x() / x.z() + k.cx, k.fy * x.y() / x.z() + k.cy};
}

std::optional<Pixel> warp(const Intrinsics& k, const Pose& pose, const Pixel& px, double depth,
                          double min_depth) {
  const Vec3 xt = pose * unproject(k, px, depth);
  if (xt.z() < min_depth) return std::nullopt;
  const Pixel out = project(k, xt);
  if (!k.contains(out.x, out.y)) return std::nullopt;
  return out;
}

Mat26 projection_twist_jacobian(double fx, double fy, const Vec3& xt) {
  const double iz = 1.0 / xt.z();
  const double x = xt.x() * iz;
  const double y = xt.y() * iz;
  Mat26 j;
  // clang-format off
  j << -fx * x * y,          fx * (1.0 + x * x), -fx * y, fx * iz, 0.0,     -fx * x * iz,
       -fy * (1.0 + y * y),  fy * x * y,          fy * x, 0.0,     fy * iz, -fy * y * iz;
  // clang-format on
  return j;
}

std::optional<Mat26> warp_jacobian(const Intrinsics& k, const Pose& pose, const Pixel& px,
                                   double depth, double min_depth) {
  const Vec3 xt = pose * unproject(k, px, depth);
  if (xt.z() < min_depth) return std::nullopt;
  return projection_twist_jacobian(k.fx, k.fy, xt);
}

namespace {

struct EpipolarLine {
  const Intrinsics& k;
  Vec3 a;  // R * normalized ray
  Vec3 t;
  double min_depth;

  // Point on the line at inverse depth rho, in homogeneous target coordinates.
  Vec3 homogeneous(double rho) const { return a + rho * t; }

  std::optional<Pixel> at(double rho) const {
    const Vec3 h = homogeneous(rho);
    if (h.z() < min_depth * rho || h.z() <= 0.0) return std::nullopt;
    const Pixel p{k.fx * h.x() / h.z() + k.cx, k.fy * h.y() / h.z() + k.cy};
    if (!k.contains(p.x, p.y)) return std::nullopt;
    return p;
  }

  // Pushes `bad` toward `good` until the in-view boundary is bracketed tightly.
  double boundary(double good, double bad) const {
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (good + bad);
      if (at(mid)) {
        good = mid;
      } else {
        bad = mid;
      }
    }
    return good;
  }
};

}  // namespace

std::vector<EpipolarSample> epipolar_segment(const Intrinsics& k, const Pose& pose,
                                             const Pixel& px, double rho_min, double rho_max,
                                             double min_depth) {
  if (!(rho_min > 0.0) || !(rho_max > rho_min)) {
    throw ConfigError("epipolar search needs 0 < rho_min < rho_max");
  }
  const Vec3 ray((px.x - k.cx) / k.fx, (px.y - k.cy) / k.fy, 1.0);
  const EpipolarLine line{k, pose.r * ray, pose.t, min_depth};

  double lo = rho_min;
  double hi = rho_max;
  if (!line.at(lo) || !line.at(hi)) {
    // The visible part of the locus is a single interval; locate it.
    constexpr int kCoarse = 64;
    int first = -1;
    int last = -1;
    for (int i = 0; i <= kCoarse; ++i) {
      const double rho = rho_min + (rho_max - rho_min) * i / kCoarse;
      if (line.at(rho)) {
        if (first < 0) first = i;
        last = i;
      }
    }
    if (first < 0) return {};
    const double step = (rho_max - rho_min) / kCoarse;
    lo = rho_min + first * step;
    hi = rho_min + last * step;
    if (first > 0) lo = line.boundary(lo, lo - step);
    if (last < kCoarse) hi = line.boundary(hi, hi + step);
  }

  const Pixel p0 = *line.at(lo);
  const Pixel p1 = *line.at(hi);
  const double dx = p1.x - p0.x;
  const double dy = p1.y - p0.y;
  const double length = std::hypot(dx, dy);
  if (length < 1e-9) return {{p0, lo}};

  // Inverse depth of a pixel on the line, solved along the dominant axis.
  const bool use_x = std::abs(dx) >= std::abs(dy);
  const auto rho_of = [&](const Pixel& p) {
    if (use_x) {
      const double xn = (p.x - k.cx) / k.fx;
      return (line.a.x() - xn * line.a.z()) / (xn * line.t.z() - line.t.x());
    }
    const double yn = (p.y - k.cy) / k.fy;
    return (line.a.y() - yn * line.a.z()) / (yn * line.t.z() - line.t.y());
  };

  const int n = static_cast<int>(std::ceil(length)) + 1;
  std::vector<EpipolarSample> out;
  out.reserve(n);
  out.push_back({p0, lo});
  for (int i = 1; i + 1 < n; ++i) {
    const double s = static_cast<double>(i) / (n - 1);
    const Pixel p{p0.x + s * dx, p0.y + s * dy};
    out.push_back({p, rho_of(p)});
  }
  out.push_back({p1, hi});
  return out;
}

}  // namespace egovo
