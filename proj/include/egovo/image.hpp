// Grayscale images, gradient pyramids, bilinear sampling and intensity
// histograms.

#ifndef EGOVO_IMAGE_HPP
#define EGOVO_IMAGE_HPP

#include <array>
#include <optional>
#include <vector>

#include "egovo/camera.hpp"

namespace egovo {

/// Row-major intensities in [0, 1].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, float fill = 0.0f);
  GrayImage(int width, int height, std::vector<float> data);

  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return data_.empty(); }
  float at(int x, int y) const { return data_[static_cast<size_t>(y) * width_ + x]; }
  float& at(int x, int y) { return data_[static_cast<size_t>(y) * width_ + x]; }
  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }
  double mean() const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> data_;
};

struct PyramidLevel {
  GrayImage image;
  GrayImage grad_x;
  GrayImage grad_y;
};

/// Level 0 is the finest; level k+1 halves (floor) level k.
struct Pyramid {
  std::vector<PyramidLevel> levels;

  int num_levels() const { return static_cast<int>(levels.size()); }
  const PyramidLevel& level(int i) const { return levels[i]; }
};

Pyramid build_pyramid(const GrayImage& img, int levels);
GrayImage downsample(const GrayImage& img);

/// Bilinear intensity; nullopt outside [0, W-1] x [0, H-1].
std::optional<double> sample_bilinear(const GrayImage& img, const Pixel& px);

struct IntensityAndGradient {
  double value;
  double dx;
  double dy;
};

/// Bilinear intensity plus the exact partial derivatives of the bilinear
/// interpolant.
std::optional<IntensityAndGradient> sample_bilinear_gradient(const GrayImage& img,
                                                             const Pixel& px);

inline constexpr int kHistogramBins = 64;
inline constexpr double kHistogramSmoothing = 1e-5;

struct IntensityHistogram {
  std::array<double, kHistogramBins> bins{};
};

IntensityHistogram histogram(const GrayImage& img);

/// Symmetrized divergence 0.5 * (KL(p||q) + KL(q||p)).
double kl_divergence(const IntensityHistogram& p, const IntensityHistogram& q);

}  // namespace egovo

#endif  // EGOVO_IMAGE_HPP
