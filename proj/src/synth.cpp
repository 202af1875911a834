#include "egovo/synth.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "egovo/errors.hpp"

namespace egovo {

int Trajectory::num_segments() const {
  int n = 0;
  for (size_t i = 0; i < entries.size(); ++i) {
    if (i == 0 || entries[i].segment != entries[i - 1].segment) ++n;
  }
  return n;
}

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice(uint64_t seed, int octave, int64_t ix, int64_t iy) {
  uint64_t h = splitmix64(seed ^ (static_cast<uint64_t>(octave) << 56));
  h = splitmix64(h ^ static_cast<uint64_t>(ix));
  h = splitmix64(h ^ static_cast<uint64_t>(iy));
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

struct Octave {
  double scale;
  double amplitude;
};

// Amplitudes sum to 1 so the texture stays inside [0, 1].
constexpr Octave kOctaves[] = {{3.0, 0.30}, {0.8, 0.25}, {0.3, 0.25}, {0.12, 0.20}};

}  // namespace

double PlaneTexture::operator()(double x, double y) const {
  double v = 0.5;
  int o = 0;
  for (const auto& oct : kOctaves) {
    const double gx = x / oct.scale;
    const double gy = y / oct.scale;
    const double fx = std::floor(gx);
    const double fy = std::floor(gy);
    const auto ix = static_cast<int64_t>(fx);
    const auto iy = static_cast<int64_t>(fy);
    const double ax = gx - fx;
    const double ay = gy - fy;
    const double v00 = lattice(seed_, o, ix, iy);
    const double v10 = lattice(seed_, o, ix + 1, iy);
    const double v01 = lattice(seed_, o, ix, iy + 1);
    const double v11 = lattice(seed_, o, ix + 1, iy + 1);
    const double top = v00 + ax * (v10 - v00);
    const double bottom = v01 + ax * (v11 - v01);
    v += oct.amplitude * (top + ay * (bottom - top) - 0.5);
    ++o;
  }
  return std::clamp(v, 0.0, 1.0);
}

Pose walk_pose(const WalkSpec& walk, int t) {
  const double phase = kTwoPi * walk.sweep_frequency * t;
  const double yaw = walk.yaw_amplitude * std::sin(phase);
  const double bob = walk.bob_amplitude * std::sin(2.0 * phase);
  return {Rotation::about_y(yaw), Vec3(0.0, bob, walk.forward_speed * t)};
}

RenderedFrame render(const SceneSpec& scene, const Pose& world_from_camera, uint64_t noise_seed) {
  const Intrinsics& k = scene.intrinsics;
  const PlaneTexture texture(scene.texture_seed);
  const PlaneTexture occluder_texture(splitmix64(scene.texture_seed + 17));
  RenderedFrame out;
  out.image = GrayImage(k.width, k.height);
  out.depth.assign(static_cast<size_t>(k.width) * k.height, 0.0);
  const Mat3& r = world_from_camera.r.matrix();
  const Vec3& c = world_from_camera.t;
  const double inv_scale = 1.0 / scene.texture_scale;

  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> noise(0.0, scene.noise_sigma > 0.0 ? scene.noise_sigma : 1.0);

  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const Vec3 ray((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
      const Vec3 d = r * ray;
      if (d.z() <= 1e-9) throw ConfigError("pixel ray parallel to or away from the plane");
      double lambda = (scene.plane_distance - c.z()) / d.z();
      if (lambda < kDefaultMinDepth) throw ConfigError("plane closer than the minimum depth");
      const Vec3 p = c + lambda * d;
      double value = texture(p.x() * inv_scale, p.y() * inv_scale);
      if (scene.occluder) {
        const Occluder& o = *scene.occluder;
        const double lo = (o.distance - c.z()) / d.z();
        const Vec3 q = c + lo * d;
        if (lo >= kDefaultMinDepth && lo < lambda && q.x() >= o.x_min && q.x() <= o.x_max &&
            q.y() >= o.y_min && q.y() <= o.y_max) {
          lambda = lo;
          value = occluder_texture(q.x() * inv_scale, q.y() * inv_scale);
        }
      }
      if (scene.noise_sigma > 0.0) value = std::clamp(value + noise(rng), 0.0, 1.0);
      out.image.at(u, v) = static_cast<float>(value);
      out.depth[static_cast<size_t>(v) * k.width + u] = lambda;
    }
  }
  return out;
}

SyntheticSequence generate(const SceneSpec& scene, const WalkSpec& walk, uint64_t seed) {
  scene.intrinsics.validate();
  if (!(scene.plane_distance > kDefaultMinDepth)) throw ConfigError("plane too close");
  if (!(scene.texture_scale > 0.0)) throw ConfigError("texture scale must be positive");
  if (!(std::abs(walk.yaw_amplitude) < kTwoPi / 4.0)) throw ConfigError("yaw amplitude must be below pi/2");
  if (!(walk.sweep_frequency > 0.0)) throw ConfigError("sweep frequency must be positive");
  if (walk.frames < 1) throw ConfigError("need at least one frame");

  SyntheticSequence seq;
  const Pose origin_inv = walk_pose(walk, 0).inverse();
  for (int t = 0; t < walk.frames; ++t) {
    const Pose world_from_cam = walk_pose(walk, t);
    RenderedFrame f;
    try {
      f = render(scene, world_from_cam, splitmix64(seed ^ splitmix64(static_cast<uint64_t>(t))));
    } catch (const ConfigError& e) {
      throw ConfigError("frame " + std::to_string(t) + ": " + e.what());
    }
    seq.frames.push_back(std::move(f.image));
    seq.depths.push_back(std::move(f.depth));
    seq.poses.push_back(origin_inv * world_from_cam);
  }
  return seq;
}

namespace {

Mat3 nearest_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  if ((u * svd.matrixV().transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * svd.matrixV().transpose();
}

}  // namespace

EvalMetrics evaluate(const Trajectory& traj, const std::vector<Pose>& gt, Alignment alignment) {
  EvalMetrics out;
  std::map<int, std::vector<const TrajectoryEntry*>> segments;
  for (const auto& e : traj.entries) segments[e.segment].push_back(&e);

  double pooled_sq = 0.0;
  double pooled_rot = 0.0;
  int pooled_n = 0;
  for (const auto& [seg, entries] : segments) {
    const int n = static_cast<int>(entries.size());
    if (n < 3) {
      out.warnings.push_back("segment " + std::to_string(seg) + " has " + std::to_string(n) +
                             " frames; skipped");
      continue;
    }
    for (const auto* e : entries) {
      if (e->frame_index < 0 || e->frame_index >= static_cast<int>(gt.size())) {
        throw ConfigError("no ground truth for frame " + std::to_string(e->frame_index));
      }
    }
    const Pose gt_origin_inv = gt[entries.front()->frame_index].inverse();
    Eigen::Matrix3Xd est(3, n), ref(3, n);
    std::vector<Pose> gt_local(n);
    for (int i = 0; i < n; ++i) {
      gt_local[i] = gt_origin_inv * gt[entries[i]->frame_index];
      est.col(i) = entries[i]->pose.t;
      ref.col(i) = gt_local[i].t;
    }

    SegmentMetrics m;
    m.segment = seg;
    m.frames = n;
    Eigen::Matrix3Xd aligned = est;
    if (alignment == Alignment::kSim3) {
      const Vec3 mean = est.rowwise().mean();
      const double spread = (est.colwise() - mean).squaredNorm();
      if (spread > 1e-18) {
        const Eigen::Matrix4d s = Eigen::umeyama(est, ref, true);
        aligned = (s.topLeftCorner<3, 3>() * est).colwise() + s.topRightCorner<3, 1>();
        m.scale = s.topLeftCorner<3, 3>().determinant() > 0.0
                      ? std::cbrt(s.topLeftCorner<3, 3>().determinant())
                      : 1.0;
      } else {
        aligned = est.colwise() + (ref.rowwise().mean() - mean);
      }
    }
    m.ate_rmse = std::sqrt((aligned - ref).squaredNorm() / n);

    Mat3 rot_align = Mat3::Identity();
    if (alignment == Alignment::kSim3) {
      Mat3 acc = Mat3::Zero();
      for (int i = 0; i < n; ++i) {
        acc += gt_local[i].r.matrix() * entries[i]->pose.r.matrix().transpose();
      }
      rot_align = nearest_rotation(acc);
    }
    const Rotation align = Rotation::from_matrix(rot_align);
    double rot_sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double err = rot_distance(align * entries[i]->pose.r, gt_local[i].r);
      rot_sum += err;
      m.rot_err_max = std::max(m.rot_err_max, err);
      if (i == n - 1) m.rot_err_final = err;
    }
    m.rot_err_mean = rot_sum / n;

    pooled_sq += m.ate_rmse * m.ate_rmse * n;
    pooled_rot += rot_sum;
    pooled_n += n;
    out.rot_err_final = m.rot_err_final;
    out.segments.push_back(m);
  }
  if (pooled_n > 0) {
    out.ate_rmse = std::sqrt(pooled_sq / pooled_n);
    out.rot_err_mean = pooled_rot / pooled_n;
  }
  return out;
}

}  // namespace egovo
