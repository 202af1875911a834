#include "egovo/tracker.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "egovo/errors.hpp"

namespace egovo {

int TrackResult::total_iterations() const {
  int n = 0;
  for (int i : iterations_per_level) n += i;
  return n;
}

void MotionPrior::update(const Pose& rel) {
  velocity = rel * last_rel.inverse();
  last_rel = rel;
  valid = true;
}

TrackingReference make_reference(const Pyramid& ref, const InverseDepthMap& depth,
                                 const Intrinsics& k) {
  TrackingReference out;
  const int levels = ref.num_levels();
  out.levels.resize(levels);

  // Inverse depth and weight per level, aggregated over 2x2 blocks.
  std::vector<double> rho = depth.rho;
  std::vector<double> var = depth.sigma2;
  std::vector<double> wt = depth.weight;
  int w = depth.width;
  int h = depth.height;
  for (int l = 0; l < levels; ++l) {
    const Intrinsics kl = k.at_level(l);
    const GrayImage& img = ref.level(l).image;
    if (l > 0) {
      const int w2 = w / 2;
      const int h2 = h / 2;
      std::vector<double> rho2(static_cast<size_t>(w2) * h2, 0.0);
      std::vector<double> var2(static_cast<size_t>(w2) * h2, 0.0);
      std::vector<double> wt2(static_cast<size_t>(w2) * h2, 0.0);
      for (int y = 0; y < h2; ++y) {
        for (int x = 0; x < w2; ++x) {
          double sw = 0.0, sr = 0.0, sv = 0.0;
          for (int dy = 0; dy < 2; ++dy) {
            for (int dx = 0; dx < 2; ++dx) {
              const size_t c = static_cast<size_t>(2 * y + dy) * w + (2 * x + dx);
              if (wt[c] > 0.0) {
                sw += wt[c];
                sr += wt[c] * rho[c];
                sv += wt[c] * var[c];
              }
            }
          }
          const size_t o = static_cast<size_t>(y) * w2 + x;
          if (sw > 0.0) {
            rho2[o] = sr / sw;
            var2[o] = sv / sw;
            wt2[o] = 0.25 * sw;
          }
        }
      }
      rho.swap(rho2);
      var.swap(var2);
      wt.swap(wt2);
      w = w2;
      h = h2;
    }
    auto& pts = out.levels[l];
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const size_t i = static_cast<size_t>(y) * w + x;
        if (!(wt[i] > 0.0)) continue;
        pts.push_back({Vec3((x - kl.cx) / kl.fx, (y - kl.cy) / kl.fy, 1.0), rho[i], var[i], wt[i],
                       static_cast<double>(img.at(x, y))});
      }
    }
  }
  return out;
}

Tracker::Tracker(const Intrinsics& k, const TrackerConfig& cfg) : k_(k), cfg_(cfg) {
  k_.validate();
}

double Tracker::huber_cost(double r) const {
  const double a = std::abs(r);
  return a <= cfg_.huber_delta ? r * r : cfg_.huber_delta * (2.0 * a - cfg_.huber_delta);
}

double Tracker::huber_weight(double r) const {
  const double a = std::abs(r);
  return a <= cfg_.huber_delta ? 1.0 : cfg_.huber_delta / a;
}

Tracker::Normal Tracker::linearize(const std::vector<ReferencePoint>& pts, const Intrinsics& k,
                                   const PyramidLevel& frame, const Pose& pose,
                                   bool smooth) const {
  Normal n;
  const Mat3& r = pose.r.matrix();
  const Vec3& t = pose.t;
  const double noise2 = 2.0 * cfg_.photometric_sigma * cfg_.photometric_sigma;
  for (const auto& p : pts) {
    const Vec3 xt = r * (p.ray / p.rho) + t;
    if (xt.z() < cfg_.min_depth) continue;
    const Pixel q{k.fx * xt.x() / xt.z() + k.cx, k.fy * xt.y() / xt.z() + k.cy};
    const auto s = sample_bilinear_gradient(frame.image, q);
    if (!s) continue;
    const double res = s->value - p.intensity;
    double gx = s->dx;
    double gy = s->dy;
    if (smooth) {
      gx = *sample_bilinear(frame.grad_x, q);
      gy = *sample_bilinear(frame.grad_y, q);
    }
    const Row6 j = Eigen::RowVector2d(gx, gy) * projection_twist_jacobian(k.fx, k.fy, xt);
    // Residual sensitivity to the point's inverse depth, through the image
    // motion of rho * xt = R ray + rho t.
    const Vec3 qs = xt * p.rho;
    const double iz = 1.0 / qs.z();
    const double du = k.fx * (t.x() - qs.x() * iz * t.z()) * iz;
    const double dv = k.fy * (t.y() - qs.y() * iz * t.z()) * iz;
    const double g = gx * du + gy * dv;
    const double wp = p.weight * noise2 / (noise2 + g * g * p.sigma2);
    const double w = wp * huber_weight(res);
    n.h.noalias() += w * j.transpose() * j;
    n.b.noalias() += w * res * j.transpose();
    n.cost += wp * huber_cost(res);
    n.weight_sum += wp;
    ++n.valid;
  }
  return n;
}

std::vector<ResidualTerm> Tracker::residual_terms(const TrackingReference& ref, int level,
                                                  const PyramidLevel& frame,
                                                  const Pose& pose) const {
  const Intrinsics k = k_.at_level(level);
  std::vector<ResidualTerm> out;
  const auto& pts = ref.levels[level];
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    const auto& p = pts[i];
    const Vec3 xt = pose * (p.ray / p.rho);
    if (xt.z() < cfg_.min_depth) continue;
    const Pixel q{k.fx * xt.x() / xt.z() + k.cx, k.fy * xt.y() / xt.z() + k.cy};
    const auto s = sample_bilinear_gradient(frame.image, q);
    if (!s) continue;
    ResidualTerm t;
    t.point = i;
    t.residual = s->value - p.intensity;
    t.jacobian = Eigen::RowVector2d(s->dx, s->dy) * projection_twist_jacobian(k.fx, k.fy, xt);
    out.push_back(t);
  }
  return out;
}

double Tracker::error(const TrackingReference& ref, int level, const PyramidLevel& frame,
                      const Pose& pose, double* valid_fraction) const {
  const auto& pts = ref.levels[level];
  const Normal n = linearize(pts, k_.at_level(level), frame, pose, false);
  if (valid_fraction) {
    *valid_fraction = pts.empty() ? 0.0 : static_cast<double>(n.valid) / pts.size();
  }
  return n.error();
}

TrackResult Tracker::track(const Pyramid& ref, const InverseDepthMap& depth, const Pyramid& frame,
                           const Pose& init) const {
  return track(make_reference(ref, depth, k_), frame, init);
}

TrackResult Tracker::track_with_motion_prior(const Pyramid& ref, const InverseDepthMap& depth,
                                             const Pyramid& frame,
                                             const MotionPrior& prior) const {
  return track(ref, depth, frame, prior.predict());
}

TrackResult Tracker::track(const TrackingReference& ref, const Pyramid& frame,
                           const Pose& init) const {
  if (ref.num_levels() == 0 || static_cast<int>(ref.levels[0].size()) < cfg_.min_points) {
    throw TrackingLost("keyframe has too few depth points");
  }
  const int levels = std::min(ref.num_levels(), frame.num_levels());

  enum class Stop { kIterations, kStepNorm, kNoDescent };
  TrackResult result;
  Pose pose = init;
  Normal n;
  Stop stop = Stop::kIterations;
  for (int l = levels - 1; l >= 0; --l) {
    const Intrinsics kl = k_.at_level(l);
    const auto& pts = ref.levels[l];
    const PyramidLevel& img = frame.level(l);
    const bool smooth = cfg_.smooth_gradients && l > 0;
    n = linearize(pts, kl, img, pose, smooth);
    stop = Stop::kIterations;
    int iters = 0;
    for (int attempt = 0; attempt < cfg_.max_iterations; ++attempt) {
      if (n.valid < 6) throw TrackingLost("no points in view at level " + std::to_string(l));
      const Eigen::SelfAdjointEigenSolver<Mat6> eig(n.h, Eigen::EigenvaluesOnly);
      const double lmin = eig.eigenvalues()(0);
      const double lmax = eig.eigenvalues()(5);
      if (!(lmax > 0.0) || !(lmin > 0.0) || lmax / lmin > cfg_.max_condition) {
        throw TrackingLost("rank-deficient normal equations at level " + std::to_string(l));
      }
      const Vec6 delta = -n.h.ldlt().solve(n.b);
      Vec6 step = delta;
      bool accepted = false;
      Pose cand;
      Normal nc;
      for (int halving = 0; halving <= cfg_.max_halvings; ++halving) {
        cand = exp_se3(Twist(step)) * pose;
        nc = linearize(pts, kl, img, cand, smooth);
        if (nc.valid >= 6 && nc.error() <= n.error()) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) {
        stop = Stop::kNoDescent;
        break;
      }
      pose = cand;
      n = nc;
      ++iters;
      if (delta.norm() < cfg_.step_tolerance) {
        stop = Stop::kStepNorm;
        break;
      }
    }
    result.iterations_per_level.push_back(iters);
  }

  const auto& fine = ref.levels[0];
  result.pose = pose;
  result.final_error = n.error();
  result.valid_pixel_fraction = static_cast<double>(n.valid) / fine.size();
  if (result.valid_pixel_fraction < cfg_.min_valid_fraction) {
    throw TrackingLost("only " + std::to_string(result.valid_pixel_fraction) +
                       " of the keyframe points remain in view");
  }
  if (result.final_error > cfg_.max_error) {
    throw TrackingLost("photometric error " + std::to_string(result.final_error) +
                       " above limit");
  }
  result.converged = stop != Stop::kIterations;
  return result;
}

RefineStep Tracker::refine_translation(const TrackingReference& ref, const PyramidLevel& frame,
                                       const Pose& init) const {
  RefineStep out;
  out.pose = init;
  const auto& pts = ref.levels.at(0);
  const Normal n = linearize(pts, k_, frame, init, false);
  out.error_before = n.error();
  out.error_after = out.error_before;
  if (n.valid < 3) return out;
  const Mat3 htt = n.h.bottomRightCorner<3, 3>();
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(htt, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues()(0) > 0.0) ||
      eig.eigenvalues()(2) / eig.eigenvalues()(0) > cfg_.max_condition) {
    return out;
  }
  const Vec3 dv = -htt.ldlt().solve(n.b.tail<3>());
  const Pose cand(init.r, init.t + dv);
  const Normal nc = linearize(pts, k_, frame, cand, false);
  if (nc.valid >= 3 && nc.error() <= n.error()) {
    out.pose = cand;
    out.error_after = nc.error();
    out.accepted = true;
  }
  return out;
}

}  // namespace egovo
