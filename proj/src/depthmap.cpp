#include "egovo/depthmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace egovo {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

InverseDepthMap::InverseDepthMap(int w, int h)
    : width(w),
      height(h),
      rho(static_cast<size_t>(w) * h, kNaN),
      sigma2(static_cast<size_t>(w) * h, kNaN),
      weight(static_cast<size_t>(w) * h, 0.0) {}

void InverseDepthMap::set(size_t i, double r, double s2, double w) {
  rho[i] = r;
  sigma2[i] = s2;
  weight[i] = w;
}

void InverseDepthMap::clear(size_t i) { set(i, kNaN, kNaN, 0.0); }

int InverseDepthMap::valid_count() const {
  return static_cast<int>(std::count_if(weight.begin(), weight.end(), [](double w) { return w > 0.0; }));
}

std::vector<uint8_t> gradient_mask(const PyramidLevel& level, double grad_min) {
  const auto& gx = level.grad_x.data();
  const auto& gy = level.grad_y.data();
  std::vector<uint8_t> mask(gx.size(), 0);
  const double g2 = grad_min * grad_min;
  for (size_t i = 0; i < gx.size(); ++i) {
    const double m2 = static_cast<double>(gx[i]) * gx[i] + static_cast<double>(gy[i]) * gy[i];
    mask[i] = m2 >= g2 ? 1 : 0;
  }
  return mask;
}

double gradient_weight(const PyramidLevel& level, int x, int y, const DepthConfig& cfg) {
  const double gx = level.grad_x.at(x, y);
  const double gy = level.grad_y.at(x, y);
  return std::min(1.0, (gx * gx + gy * gy) / (cfg.grad_norm * cfg.grad_norm));
}

InverseDepthMap bootstrap(const PyramidLevel& level, uint64_t seed, const DepthConfig& cfg) {
  const int w = level.image.width();
  const int h = level.image.height();
  InverseDepthMap map(w, h);
  const auto mask = gradient_mask(level, cfg.grad_min);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(cfg.rho_init_min, cfg.rho_init_max);
  const double var = cfg.sigma_init * cfg.sigma_init;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = map.index(x, y);
      if (!mask[i]) continue;
      map.set(i, dist(rng), var, gradient_weight(level, x, y, cfg));
    }
  }
  return map;
}

GaussianEstimate fuse(const GaussianEstimate& a, const GaussianEstimate& b) {
  const double s = a.var + b.var;
  return {(a.mean * b.var + b.mean * a.var) / s, a.var * b.var / s};
}

double depth_weight(double grad_weight, double sigma2, const DepthConfig& cfg) {
  const double gain = cfg.sigma_init / std::sqrt(sigma2);
  return std::clamp(grad_weight * std::max(gain, 1.0), 0.0, 1.0);
}

namespace {

double median_rho(const InverseDepthMap& m) {
  std::vector<double> v;
  v.reserve(m.rho.size());
  for (size_t i = 0; i < m.rho.size(); ++i) {
    if (m.valid(i)) v.push_back(m.rho[i]);
  }
  if (v.empty()) return kNaN;
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

// Projects the keyframe ray through (u, v) at inverse depth rho into the frame
// without bounds checks.
bool project_ray(const Intrinsics& k, const Pose& pose, double u, double v, double rho,
                 Pixel& out) {
  const Vec3 ray((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
  const Vec3 h = pose.r * ray + rho * pose.t;
  if (h.z() <= 0.0) return false;
  out = {k.fx * h.x() / h.z() + k.cx, k.fy * h.y() / h.z() + k.cy};
  return true;
}

}  // namespace

InverseDepthMap stereo_update(const PyramidLevel& kf, const InverseDepthMap& prior,
                              const PyramidLevel& frame, const Pose& frame_from_kf,
                              const Intrinsics& k, const DepthConfig& cfg, StereoStats* stats) {
  InverseDepthMap out = prior;
  StereoStats local;
  const int w = prior.width;
  const int h = prior.height;
  const auto mask = gradient_mask(kf, cfg.grad_min);
  const double rho_med = median_rho(prior);
  const int half = cfg.patch_size / 2;
  std::vector<double> ref(cfg.patch_size);
  std::vector<double> ssd;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = prior.index(x, y);
      if (!mask[i]) continue;
      const bool has_prior = prior.valid(i);
      if (!has_prior && !std::isfinite(rho_med)) continue;
      ++local.searched;

      double lo, hi, rho_ref;
      if (has_prior) {
        const double sd = std::sqrt(prior.sigma2[i]);
        rho_ref = prior.rho[i];
        lo = std::max(rho_ref - 2.0 * sd, cfg.rho_min);
        hi = std::min(rho_ref + 2.0 * sd, cfg.rho_max);
      } else {
        lo = std::max(0.25 * rho_med, cfg.rho_min);
        hi = std::min(4.0 * rho_med, cfg.rho_max);
        rho_ref = std::sqrt(lo * hi);
      }
      if (!(hi > lo)) continue;

      const Pixel px{static_cast<double>(x), static_cast<double>(y)};
      auto seg = epipolar_segment(k, frame_from_kf, px, lo, hi, cfg.min_depth);
      if (seg.size() < 2) {
        ++local.no_parallax;
        continue;
      }
      double seg_len = std::hypot(seg.back().px.x - seg.front().px.x,
                                  seg.back().px.y - seg.front().px.y);
      double sens = seg_len / (seg.back().inv_depth - seg.front().inv_depth);
      if (!(sens > 0.0) || !std::isfinite(sens)) {
        ++local.no_parallax;
        continue;
      }
      const double geo_sd = cfg.pixel_noise / sens;
      if (has_prior && geo_sd * geo_sd >= prior.sigma2[i]) {
        ++local.no_parallax;
        continue;
      }
      if (!has_prior && geo_sd > 0.25 * rho_ref) {
        ++local.no_parallax;
        continue;
      }
      if (seg_len < cfg.min_search_px) {
        const double half_range = 0.5 * cfg.min_search_px / sens;
        const double lo2 = std::max(rho_ref - half_range, cfg.rho_min);
        const double hi2 = std::min(rho_ref + half_range, cfg.rho_max);
        if (hi2 > lo2) {
          seg = epipolar_segment(k, frame_from_kf, px, lo2, hi2, cfg.min_depth);
          if (seg.size() < 2) continue;
          seg_len = std::hypot(seg.back().px.x - seg.front().px.x,
                               seg.back().px.y - seg.front().px.y);
        }
      }

      // Epipolar direction in the frame and the matching keyframe direction.
      const double dfx = (seg.back().px.x - seg.front().px.x) / seg_len;
      const double dfy = (seg.back().px.y - seg.front().px.y) / seg_len;
      Pixel p0, pu, pv;
      if (!project_ray(k, frame_from_kf, x, y, rho_ref, p0) ||
          !project_ray(k, frame_from_kf, x + 1.0, y, rho_ref, pu) ||
          !project_ray(k, frame_from_kf, x, y + 1.0, rho_ref, pv)) {
        continue;
      }
      Eigen::Matrix2d a;
      a << pu.x - p0.x, pv.x - p0.x, pu.y - p0.y, pv.y - p0.y;
      if (std::abs(a.determinant()) < 1e-9) continue;
      Eigen::Vector2d dk = a.inverse() * Eigen::Vector2d(dfx, dfy);
      const double nk = dk.norm();
      dk /= nk;
      const double step_fx = dfx / nk;
      const double step_fy = dfy / nk;

      bool ref_ok = true;
      for (int j = -half; j <= half; ++j) {
        const auto v = sample_bilinear(kf.image, {x + j * dk.x(), y + j * dk.y()});
        if (!v) {
          ref_ok = false;
          break;
        }
        ref[j + half] = *v;
      }
      if (!ref_ok) continue;
      const auto gp = sample_bilinear(kf.image, {x + dk.x(), y + dk.y()});
      const auto gm = sample_bilinear(kf.image, {x - dk.x(), y - dk.y()});
      if (!gp || !gm) continue;
      const double g_frame = std::max(std::abs(0.5 * (*gp - *gm)) * nk, 1e-6);

      const int n = static_cast<int>(seg.size());
      ssd.assign(n, kInf);
      for (int s = 0; s < n; ++s) {
        double e = 0.0;
        bool ok = true;
        for (int j = -half; j <= half; ++j) {
          const auto v =
              sample_bilinear(frame.image, {seg[s].px.x + j * step_fx, seg[s].px.y + j * step_fy});
          if (!v) {
            ok = false;
            break;
          }
          const double d = *v - ref[j + half];
          e += d * d;
        }
        if (ok) ssd[s] = e;
      }
      const int best = static_cast<int>(std::min_element(ssd.begin(), ssd.end()) - ssd.begin());
      if (!std::isfinite(ssd[best]) || ssd[best] > cfg.max_ssd) {
        ++local.ambiguous;
        continue;
      }
      double second = kInf;
      for (int s = 0; s < n; ++s) {
        if (std::abs(s - best) > 2) second = std::min(second, ssd[s]);
      }
      if (second < cfg.ambiguity_ratio * ssd[best]) {
        ++local.ambiguous;
        continue;
      }

      double offset = 0.0;  // along the segment, in samples
      if (best > 0 && best + 1 < n && std::isfinite(ssd[best - 1]) &&
          std::isfinite(ssd[best + 1])) {
        const double em = ssd[best - 1];
        const double e0 = ssd[best];
        const double ep = ssd[best + 1];
        const double denom = em - 2.0 * e0 + ep;
        offset = denom > 0.0 ? std::clamp(0.5 * (em - ep) / denom, -0.5, 0.5) : 0.0;
      }
      const int nb = offset >= 0.0 ? std::min(best + 1, n - 1) : std::max(best - 1, 0);
      const double spacing = nb != best ? std::hypot(seg[nb].px.x - seg[best].px.x,
                                                     seg[nb].px.y - seg[best].px.y)
                                        : 1.0;
      // Gauss-Newton on the patch SSD along the epipolar direction, in pixels.
      double shift = std::abs(offset) * spacing * (offset >= 0.0 ? 1.0 : -1.0);
      for (int it = 0; it < 3; ++it) {
        double jtj = 0.0, jtr = 0.0;
        bool ok = true;
        for (int j = -half; j <= half && ok; ++j) {
          const auto v = sample_bilinear_gradient(
              frame.image, {seg[best].px.x + shift * dfx + j * step_fx,
                            seg[best].px.y + shift * dfy + j * step_fy});
          if (!v) {
            ok = false;
            break;
          }
          const double jac = v->dx * dfx + v->dy * dfy;
          jtj += jac * jac;
          jtr += jac * (v->value - ref[j + half]);
        }
        if (!ok || !(jtj > 1e-12)) break;
        const double next = std::clamp(shift - jtr / jtj, -1.0, 1.0);
        const bool done = std::abs(next - shift) < 1e-3;
        shift = next;
        if (done) break;
      }
      const int nb2 = shift >= 0.0 ? std::min(best + 1, n - 1) : std::max(best - 1, 0);
      double rho_obs = seg[best].inv_depth;
      if (nb2 != best) {
        const double sp = std::hypot(seg[nb2].px.x - seg[best].px.x, seg[nb2].px.y - seg[best].px.y);
        if (sp > 0.0) rho_obs += std::abs(shift) / sp * (seg[nb2].inv_depth - seg[best].inv_depth);
      }
      double local_sens = sens;
      if (best > 0 && best + 1 < n) {
        const double dpx = std::hypot(seg[best + 1].px.x - seg[best - 1].px.x,
                                      seg[best + 1].px.y - seg[best - 1].px.y);
        const double drho = std::abs(seg[best + 1].inv_depth - seg[best - 1].inv_depth);
        if (drho > 0.0) local_sens = dpx / drho;
      }
      if (!(rho_obs > 0.0) || rho_obs > cfg.rho_max) continue;

      const double photo_px = cfg.photometric_noise / g_frame;
      const double px_var = cfg.pixel_noise * cfg.pixel_noise + 2.0 * photo_px * photo_px;
      const double obs_var = px_var / (local_sens * local_sens);
      GaussianEstimate est{rho_obs, obs_var};
      if (has_prior) est = fuse({prior.rho[i], prior.sigma2[i]}, est);
      if (!(est.mean > 0.0) || est.mean > cfg.rho_max) continue;
      out.set(i, est.mean, est.var, depth_weight(gradient_weight(kf, x, y, cfg), est.var, cfg));
      ++local.updated;
    }
  }
  if (stats) *stats = local;
  return out;
}

InverseDepthMap propagate(const InverseDepthMap& old_map, const Pose& new_from_old,
                          const PyramidLevel& new_level, const Intrinsics& k,
                          const DepthConfig& cfg) {
  const int w = old_map.width;
  const int h = old_map.height;
  InverseDepthMap out(w, h);
  const auto mask = gradient_mask(new_level, cfg.grad_min);
  const Vec3 r3 = new_from_old.r.matrix().row(2).transpose();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t i = old_map.index(x, y);
      if (!old_map.valid(i)) continue;
      const double rho = old_map.rho[i];
      const Vec3 ray((x - k.cx) / k.fx, (y - k.cy) / k.fy, 1.0);
      const Vec3 xt = new_from_old * (ray / rho);
      if (xt.z() < cfg.min_depth) continue;
      const int u = static_cast<int>(std::lround(k.fx * xt.x() / xt.z() + k.cx));
      const int v = static_cast<int>(std::lround(k.fy * xt.y() / xt.z() + k.cy));
      if (u < 0 || v < 0 || u >= w || v >= h) continue;
      const size_t j = out.index(u, v);
      if (!mask[j]) continue;
      const double rho_new = 1.0 / xt.z();
      if (out.valid(j) && out.rho[j] >= rho_new) continue;
      // d rho' / d rho for a point moving along its ray.
      const double ratio = rho_new / rho;
      const double jac = ratio * ratio * r3.dot(ray);
      const double var = cfg.kappa_prop * old_map.sigma2[i] * jac * jac;
      out.set(j, rho_new, var, depth_weight(gradient_weight(new_level, u, v, cfg), var, cfg));
    }
  }
  return out;
}

}  // namespace egovo
