#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "latch/keypoint.hpp"

namespace latch {

// Row-major 8-bit grayscale raster.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(std::uint32_t width, std::uint32_t height, std::uint8_t fill = 0);
  GrayImage(std::uint32_t width, std::uint32_t height,
            std::vector<std::uint8_t> data);

  std::uint32_t width() const { return width_; }
  std::uint32_t height() const { return height_; }
  bool empty() const { return data_.empty(); }

  std::uint8_t operator()(int x, int y) const {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  std::uint8_t& operator()(int x, int y) {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<const std::uint8_t> row(int y) const {
    return {data_.data() + static_cast<std::size_t>(y) * width_, width_};
  }
  std::span<const std::uint8_t> pixels() const { return data_; }
  std::span<std::uint8_t> pixels() { return data_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Pixel offset relative to a window center.
struct Offset {
  int x = 0;
  int y = 0;
  friend bool operator==(const Offset&, const Offset&) = default;
};

// A side x side raster resampled around a keypoint. Cell (side/2, side/2)
// is the keypoint; offsets address cells relative to it.
struct Window {
  GrayImage raster;
  float center_x = 0.f;
  float center_y = 0.f;
  float orientation = 0.f;
  float scale = 1.f;

  int side() const { return static_cast<int>(raster.width()); }
  int origin() const { return side() / 2; }
  std::uint8_t at(Offset o) const {
    return raster(origin() + o.x, origin() + o.y);
  }
};

// Separable Gaussian blur, radius ceil(3 sigma), replicated borders, output
// rounded to the nearest integer.
GrayImage gaussian_smooth(const GrayImage& img, float sigma);

// Bilinear sample with integer coordinates addressing pixel centers. Caller
// guarantees 0 <= x <= width-1 and 0 <= y <= height-1.
float bilinear(const GrayImage& img, float x, float y);

// Window cell (u, v) samples center + scale * R(orientation) * (u - side/2,
// v - side/2). Throws BoundsError if any sample leaves the image.
Window sample_window(const GrayImage& img, const Keypoint& kp, int side);

// True iff sample_window(img, kp, side) would succeed.
bool window_fits(const GrayImage& img, const Keypoint& kp, int side);

// Wraps a raster that already is a window (e.g. a dataset patch) without
// resampling. The raster must be square with even side.
Window window_from_raster(GrayImage raster);

// Sum of squared differences between the k x k patches centered at a and b.
// Throws BoundsError if either footprint leaves the window.
std::uint32_t patch_ssd(const Window& win, Offset a, Offset b, int k);

// Same as patch_ssd without bounds checks; both footprints must fit.
std::uint32_t patch_ssd_unchecked(const GrayImage& raster, int origin, Offset a,
                                  Offset b, int k);

}  // namespace latch
