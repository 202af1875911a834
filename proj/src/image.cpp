#include "egovo/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "egovo/errors.hpp"

namespace egovo {

GrayImage::GrayImage(int width, int height, float fill)
    : width_(width), height_(height), data_(static_cast<size_t>(width) * height, fill) {}

GrayImage::GrayImage(int width, int height, std::vector<float> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (data_.size() != static_cast<size_t>(width) * height) {
    throw ConfigError("image buffer size does not match " + std::to_string(width) + "x" +
                      std::to_string(height));
  }
}

double GrayImage::mean() const {
  if (data_.empty()) return 0.0;
  return std::accumulate(data_.begin(), data_.end(), 0.0) / static_cast<double>(data_.size());
}

GrayImage downsample(const GrayImage& img) {
  const int w = img.width() / 2;
  const int h = img.height() / 2;
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double s = static_cast<double>(img.at(2 * x, 2 * y)) + img.at(2 * x + 1, 2 * y) +
                       img.at(2 * x, 2 * y + 1) + img.at(2 * x + 1, 2 * y + 1);
      out.at(x, y) = static_cast<float>(0.25 * s);
    }
  }
  return out;
}

namespace {

void gradients(const GrayImage& img, GrayImage& gx, GrayImage& gy) {
  const int w = img.width();
  const int h = img.height();
  gx = GrayImage(w, h);
  gy = GrayImage(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (w > 1) {
        if (x == 0) {
          gx.at(x, y) = img.at(1, y) - img.at(0, y);
        } else if (x == w - 1) {
          gx.at(x, y) = img.at(x, y) - img.at(x - 1, y);
        } else {
          gx.at(x, y) = 0.5f * (img.at(x + 1, y) - img.at(x - 1, y));
        }
      }
      if (h > 1) {
        if (y == 0) {
          gy.at(x, y) = img.at(x, 1) - img.at(x, 0);
        } else if (y == h - 1) {
          gy.at(x, y) = img.at(x, y) - img.at(x, y - 1);
        } else {
          gy.at(x, y) = 0.5f * (img.at(x, y + 1) - img.at(x, y - 1));
        }
      }
    }
  }
}

}  // namespace

Pyramid build_pyramid(const GrayImage& img, int levels) {
  if (levels < 1) throw ConfigError("pyramid needs at least one level");
  const int min_size = 1 << (levels - 1);
  if (img.width() < min_size || img.height() < min_size) {
    throw ConfigError("image " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                      " too small for " + std::to_string(levels) + " pyramid levels");
  }
  Pyramid pyr;
  pyr.levels.resize(levels);
  pyr.levels[0].image = img;
  for (int l = 1; l < levels; ++l) pyr.levels[l].image = downsample(pyr.levels[l - 1].image);
  for (auto& lvl : pyr.levels) gradients(lvl.image, lvl.grad_x, lvl.grad_y);
  return pyr;
}

namespace {

struct Cell {
  int x0, y0;
  double ax, ay;
};

std::optional<Cell> locate(const GrayImage& img, const Pixel& px) {
  const int w = img.width();
  const int h = img.height();
  if (!(px.x >= 0.0 && px.y >= 0.0 && px.x <= w - 1.0 && px.y <= h - 1.0)) return std::nullopt;
  const int x0 = std::min(static_cast<int>(px.x), std::max(w - 2, 0));
  const int y0 = std::min(static_cast<int>(px.y), std::max(h - 2, 0));
  return Cell{x0, y0, px.x - x0, px.y - y0};
}

}  // namespace

std::optional<double> sample_bilinear(const GrayImage& img, const Pixel& px) {
  const auto c = locate(img, px);
  if (!c) return std::nullopt;
  const int x1 = std::min(c->x0 + 1, img.width() - 1);
  const int y1 = std::min(c->y0 + 1, img.height() - 1);
  const double i00 = img.at(c->x0, c->y0);
  const double i10 = img.at(x1, c->y0);
  const double i01 = img.at(c->x0, y1);
  const double i11 = img.at(x1, y1);
  const double top = i00 + c->ax * (i10 - i00);
  const double bottom = i01 + c->ax * (i11 - i01);
  return top + c->ay * (bottom - top);
}

std::optional<IntensityAndGradient> sample_bilinear_gradient(const GrayImage& img,
                                                             const Pixel& px) {
  const auto c = locate(img, px);
  if (!c) return std::nullopt;
  const int x1 = std::min(c->x0 + 1, img.width() - 1);
  const int y1 = std::min(c->y0 + 1, img.height() - 1);
  const double i00 = img.at(c->x0, c->y0);
  const double i10 = img.at(x1, c->y0);
  const double i01 = img.at(c->x0, y1);
  const double i11 = img.at(x1, y1);
  const double top = i00 + c->ax * (i10 - i00);
  const double bottom = i01 + c->ax * (i11 - i01);
  IntensityAndGradient out;
  out.value = top + c->ay * (bottom - top);
  out.dx = (1.0 - c->ay) * (i10 - i00) + c->ay * (i11 - i01);
  out.dy = bottom - top;
  return out;
}

IntensityHistogram histogram(const GrayImage& img) {
  IntensityHistogram h;
  for (const float v : img.data()) {
    const int bin = std::clamp(static_cast<int>(v * kHistogramBins), 0, kHistogramBins - 1);
    h.bins[bin] += 1.0;
  }
  const double n = std::max<double>(1.0, static_cast<double>(img.data().size()));
  const double norm = 1.0 + kHistogramBins * kHistogramSmoothing;
  for (double& b : h.bins) b = (b / n + kHistogramSmoothing) / norm;
  return h;
}

double kl_divergence(const IntensityHistogram& p, const IntensityHistogram& q) {
  double d = 0.0;
  for (int i = 0; i < kHistogramBins; ++i) {
    d += (p.bins[i] - q.bins[i]) * std::log(p.bins[i] / q.bins[i]);
  }
  return 0.5 * d;
}

}  // namespace egovo
