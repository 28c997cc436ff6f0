#include "latch/image.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "latch/error.hpp"

namespace latch {

GrayImage::GrayImage(std::uint32_t width, std::uint32_t height, std::uint8_t fill)
    : width_(width), height_(height),
      data_(static_cast<std::size_t>(width) * height, fill) {
  if (width == 0 || height == 0)
    throw ArgumentError("image dimensions must be positive");
}

GrayImage::GrayImage(std::uint32_t width, std::uint32_t height,
                     std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
  if (width == 0 || height == 0)
    throw ArgumentError("image dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(width) * height)
    throw ArgumentError("image data length does not match width*height");
}

namespace {

std::vector<double> gaussian_kernel(float sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> half(radius + 1);
  double sum = 0.0;
  for (int j = 0; j <= radius; ++j) {
    half[j] = std::exp(-(j * j) / (2.0 * sigma * sigma));
    sum += j == 0 ? half[j] : 2.0 * half[j];
  }
  for (double& w : half) w /= sum;
  return half;
}

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Both footprint corners of a window decide whether it fits: the sampling
// transform is affine, so the extreme coordinates sit at the corners.
struct Footprint {
  float cos_t, sin_t, scale, cx, cy;
  int half;

  float x(int u, int v) const {
    const float a = static_cast<float>(u - half), b = static_cast<float>(v - half);
    return cx + scale * (cos_t * a - sin_t * b);
  }
  float y(int u, int v) const {
    const float a = static_cast<float>(u - half), b = static_cast<float>(v - half);
    return cy + scale * (sin_t * a + cos_t * b);
  }
};

Footprint footprint_of(const Keypoint& kp, int side) {
  return {std::cos(kp.orientation), std::sin(kp.orientation), kp.scale, kp.x, kp.y,
          side / 2};
}

bool fits(const GrayImage& img, const Footprint& f, int side) {
  const float max_x = static_cast<float>(img.width() - 1);
  const float max_y = static_cast<float>(img.height() - 1);
  for (int u : {0, side - 1}) {
    for (int v : {0, side - 1}) {
      const float x = f.x(u, v), y = f.y(u, v);
      if (!(x >= 0.f && x <= max_x && y >= 0.f && y <= max_y)) return false;
    }
  }
  return true;
}

}  // namespace

GrayImage gaussian_smooth(const GrayImage& img, float sigma) {
  if (!(sigma > 0.f)) throw ArgumentError("gaussian_smooth: sigma must be > 0");
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size()) - 1;
  const int w = static_cast<int>(img.width());
  const int h = static_cast<int>(img.height());

  // Symmetric taps are summed pairwise so the result is exactly
  // mirror-invariant.
  std::vector<double> tmp(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    const auto row = img.row(y);
    for (int x = 0; x < w; ++x) {
      double acc = kernel[0] * row[x];
      for (int j = 1; j <= radius; ++j) {
        const int l = std::max(x - j, 0), r = std::min(x + j, w - 1);
        acc += kernel[j] * (static_cast<double>(row[l]) + row[r]);
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  GrayImage out(img.width(), img.height());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = kernel[0] * tmp[static_cast<std::size_t>(y) * w + x];
      for (int j = 1; j <= radius; ++j) {
        const int t = std::max(y - j, 0), b = std::min(y + j, h - 1);
        acc += kernel[j] * (tmp[static_cast<std::size_t>(t) * w + x] +
                            tmp[static_cast<std::size_t>(b) * w + x]);
      }
      out(x, y) = to_u8(acc);
    }
  }
  return out;
}

float bilinear(const GrayImage& img, float x, float y) {
  const int w = static_cast<int>(img.width()), h = static_cast<int>(img.height());
  const float fx0 = std::floor(x), fy0 = std::floor(y);
  const int x0 = std::clamp(static_cast<int>(fx0), 0, w - 1);
  const int y0 = std::clamp(static_cast<int>(fy0), 0, h - 1);
  const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
  const float ax = x - fx0, ay = y - fy0;
  const float top = img(x0, y0) + ax * (img(x1, y0) - img(x0, y0));
  const float bottom = img(x0, y1) + ax * (img(x1, y1) - img(x0, y1));
  return top + ay * (bottom - top);
}

bool window_fits(const GrayImage& img, const Keypoint& kp, int side) {
  if (side < 2 || side % 2 != 0) return false;
  return fits(img, footprint_of(kp, side), side);
}

Window sample_window(const GrayImage& img, const Keypoint& kp, int side) {
  if (side < 2 || side % 2 != 0)
    throw ArgumentError("sample_window: side must be even and >= 2");
  const Footprint f = footprint_of(kp, side);
  if (!fits(img, f, side)) {
    std::ostringstream msg;
    msg << "sample_window: " << side << "x" << side << " window around keypoint ("
        << kp.x << ", " << kp.y << ") orientation " << kp.orientation << " scale "
        << kp.scale << " leaves the " << img.width() << "x" << img.height()
        << " image";
    throw BoundsError(msg.str());
  }
  Window win;
  win.raster = GrayImage(side, side);
  win.center_x = kp.x;
  win.center_y = kp.y;
  win.orientation = kp.orientation;
  win.scale = kp.scale;
  for (int v = 0; v < side; ++v)
    for (int u = 0; u < side; ++u)
      win.raster(u, v) = to_u8(bilinear(img, f.x(u, v), f.y(u, v)));
  return win;
}

Window window_from_raster(GrayImage raster) {
  if (raster.width() != raster.height() || raster.width() % 2 != 0)
    throw ArgumentError("window_from_raster: raster must be square with even side");
  Window win;
  win.center_x = static_cast<float>(raster.width() / 2);
  win.center_y = static_cast<float>(raster.height() / 2);
  win.raster = std::move(raster);
  return win;
}

std::uint32_t patch_ssd_unchecked(const GrayImage& raster, int origin, Offset a,
                                  Offset b, int k) {
  const int half = k / 2;
  const int ax = origin + a.x - half, ay = origin + a.y - half;
  const int bx = origin + b.x - half, by = origin + b.y - half;
  std::uint32_t sum = 0;
  for (int r = 0; r < k; ++r) {
    const std::uint8_t* pa = raster.row(ay + r).data() + ax;
    const std::uint8_t* pb = raster.row(by + r).data() + bx;
    for (int c = 0; c < k; ++c) {
      const int d = static_cast<int>(pa[c]) - static_cast<int>(pb[c]);
      sum += static_cast<std::uint32_t>(d * d);
    }
  }
  return sum;
}

std::uint32_t patch_ssd(const Window& win, Offset a, Offset b, int k) {
  if (k < 1 || k % 2 == 0) throw ArgumentError("patch_ssd: k must be odd and >= 1");
  const int half = k / 2, origin = win.origin(), side = win.side();
  for (Offset o : {a, b}) {
    if (origin + o.x - half < 0 || origin + o.x + half > side - 1 ||
        origin + o.y - half < 0 || origin + o.y + half > side - 1) {
      std::ostringstream msg;
      msg << "patch_ssd: " << k << "x" << k << " patch at offset (" << o.x << ", "
          << o.y << ") leaves the " << side << "x" << side << " window";
      throw BoundsError(msg.str());
    }
  }
  return patch_ssd_unchecked(win.raster, origin, a, b, k);
}

}  // namespace latch
