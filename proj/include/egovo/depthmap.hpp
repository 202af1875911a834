// Semi-dense inverse-depth map of a keyframe: random bootstrap, epipolar
// SSD stereo updates fused as Gaussians in inverse depth, and propagation to
// the next keyframe.

#ifndef EGOVO_DEPTHMAP_HPP
#define EGOVO_DEPTHMAP_HPP

#include <cstdint>
#include <vector>

#include "egovo/camera.hpp"
#include "egovo/image.hpp"

namespace egovo {

struct DepthConfig {
  double grad_min = 0.02;        // intensity / pixel
  double grad_norm = 0.2;        // gradient at which the bootstrap weight saturates
  int patch_size = 5;            // samples along the epipolar line
  double sigma_init = 1.0;       // bootstrap inverse-depth std deviation
  double kappa_prop = 1.1;       // variance inflation on propagation
  double ambiguity_ratio = 1.2;  // second-best SSD must exceed ratio * best
  double rho_init_min = 0.5;
  double rho_init_max = 2.0;
  double rho_min = 1e-3;
  double rho_max = 1.0 / kDefaultMinDepth;
  double min_depth = kDefaultMinDepth;
  double pixel_noise = 0.5;        // matching localisation noise, pixels
  double photometric_noise = 0.01; // intensity noise used to scale matching noise
  double max_ssd = 0.02;           // per-patch SSD above which a match is rejected
  double min_search_px = 3.0;      // search segments are widened to at least this
};

/// Per-pixel inverse depth. Wherever weight > 0: rho in (0, rho_max] and
/// sigma2 > 0. Elsewhere rho and sigma2 are NaN and weight is 0.
struct InverseDepthMap {
  int width = 0;
  int height = 0;
  std::vector<double> rho;
  std::vector<double> sigma2;
  std::vector<double> weight;

  InverseDepthMap() = default;
  InverseDepthMap(int w, int h);

  size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
  bool valid(size_t i) const { return weight[i] > 0.0; }
  bool valid(int x, int y) const { return valid(index(x, y)); }
  void set(size_t i, double r, double s2, double w);
  void clear(size_t i);
  int valid_count() const;
};

/// Pixels whose squared gradient magnitude is at least grad_min^2.
std::vector<uint8_t> gradient_mask(const PyramidLevel& level, double grad_min);

/// Gradient confidence min(1, |grad I|^2 / grad_norm^2) at one pixel.
double gradient_weight(const PyramidLevel& level, int x, int y, const DepthConfig& cfg);

InverseDepthMap bootstrap(const PyramidLevel& level, uint64_t seed, const DepthConfig& cfg);

struct GaussianEstimate {
  double mean;
  double var;
};

/// Product of two Gaussians in inverse depth.
GaussianEstimate fuse(const GaussianEstimate& a, const GaussianEstimate& b);

/// Weight after an update: gradient confidence scaled by the gain in
/// precision over the bootstrap prior, capped at 1.
double depth_weight(double grad_weight, double sigma2, const DepthConfig& cfg);

struct StereoStats {
  int searched = 0;
  int updated = 0;
  int ambiguous = 0;
  int no_parallax = 0;
};

/// One stereo observation of the keyframe depth from `frame`, where
/// `frame_from_kf` maps keyframe coordinates into the frame. Reads only the
/// prior map, so per-pixel results do not depend on visiting order.
InverseDepthMap stereo_update(const PyramidLevel& kf, const InverseDepthMap& prior,
                              const PyramidLevel& frame, const Pose& frame_from_kf,
                              const Intrinsics& k, const DepthConfig& cfg,
                              StereoStats* stats = nullptr);

/// Carries a keyframe's map into a new keyframe at `new_from_old`. Collisions
/// keep the nearer point; pixels without enough gradient in the new image
/// and unreached pixels stay empty.
InverseDepthMap propagate(const InverseDepthMap& old_map, const Pose& new_from_old,
                          const PyramidLevel& new_level, const Intrinsics& k,
                          const DepthConfig& cfg);

}  // namespace egovo

#endif  // EGOVO_DEPTHMAP_HPP
