#include "latch/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <tuple>

#include "latch/error.hpp"
#include "latch/parallel.hpp"

namespace latch {
namespace {

std::vector<float> blur_float(const std::vector<float>& src, int w, int h, float sigma) {
  const int radius = static_cast<int>(std::ceil(3.0f * sigma));
  std::vector<float> kernel(radius + 1);
  float sum = 0.f;
  for (int j = 0; j <= radius; ++j) {
    kernel[j] = std::exp(-(j * j) / (2.f * sigma * sigma));
    sum += j == 0 ? kernel[j] : 2.f * kernel[j];
  }
  for (float& v : kernel) v /= sum;

  std::vector<float> tmp(src.size()), out(src.size());
  for (int y = 0; y < h; ++y) {
    const float* row = &src[static_cast<std::size_t>(y) * w];
    for (int x = 0; x < w; ++x) {
      float acc = kernel[0] * row[x];
      for (int j = 1; j <= radius; ++j)
        acc += kernel[j] * (row[std::max(x - j, 0)] + row[std::min(x + j, w - 1)]);
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float acc = kernel[0] * tmp[static_cast<std::size_t>(y) * w + x];
      for (int j = 1; j <= radius; ++j) {
        const int t = std::max(y - j, 0), b = std::min(y + j, h - 1);
        acc += kernel[j] * (tmp[static_cast<std::size_t>(t) * w + x] +
                            tmp[static_cast<std::size_t>(b) * w + x]);
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return out;
}

struct Candidate {
  Keypoint kp;
  int level;
};

}  // namespace

std::vector<float> harris_response(const GrayImage& img, float k_harris,
                                   float tensor_sigma) {
  const int w = static_cast<int>(img.width()), h = static_cast<int>(img.height());
  const auto px = [&](int x, int y) -> float {
    return img(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1));
  };
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<float> ixx(n), iyy(n), ixy(n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float gx = (px(x + 1, y - 1) + 2.f * px(x + 1, y) + px(x + 1, y + 1)) -
                       (px(x - 1, y - 1) + 2.f * px(x - 1, y) + px(x - 1, y + 1));
      const float gy = (px(x - 1, y + 1) + 2.f * px(x, y + 1) + px(x + 1, y + 1)) -
                       (px(x - 1, y - 1) + 2.f * px(x, y - 1) + px(x + 1, y - 1));
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      // Sobel gain is 8; normalizing keeps responses in a sane float range.
      ixx[i] = gx * gx / 64.f;
      iyy[i] = gy * gy / 64.f;
      ixy[i] = gx * gy / 64.f;
    }
  }
  ixx = blur_float(ixx, w, h, tensor_sigma);
  iyy = blur_float(iyy, w, h, tensor_sigma);
  ixy = blur_float(ixy, w, h, tensor_sigma);
  std::vector<float> response(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float det = ixx[i] * iyy[i] - ixy[i] * ixy[i];
    const float tr = ixx[i] + iyy[i];
    response[i] = det - k_harris * tr * tr;
  }
  return response;
}

GrayImage downsample(const GrayImage& img, std::uint32_t new_width,
                     std::uint32_t new_height) {
  const GrayImage smooth = gaussian_smooth(img, 0.75f);
  const float fx = static_cast<float>(img.width()) / new_width;
  const float fy = static_cast<float>(img.height()) / new_height;
  const float max_x = static_cast<float>(img.width() - 1);
  const float max_y = static_cast<float>(img.height() - 1);
  GrayImage out(new_width, new_height);
  for (std::uint32_t y = 0; y < new_height; ++y) {
    const float sy = std::clamp((y + 0.5f) * fy - 0.5f, 0.f, max_y);
    for (std::uint32_t x = 0; x < new_width; ++x) {
      const float sx = std::clamp((x + 0.5f) * fx - 0.5f, 0.f, max_x);
      out(x, y) = static_cast<std::uint8_t>(
          std::clamp(std::lround(bilinear(smooth, sx, sy)), 0L, 255L));
    }
  }
  return out;
}

float intensity_centroid_orientation(const GrayImage& img, const Keypoint& kp,
                                     int radius) {
  const int cx = static_cast<int>(std::lround(kp.x));
  const int cy = static_cast<int>(std::lround(kp.y));
  if (radius < 0 || cx - radius < 0 || cy - radius < 0 ||
      cx + radius > static_cast<int>(img.width()) - 1 ||
      cy + radius > static_cast<int>(img.height()) - 1) {
    std::ostringstream msg;
    msg << "orientation disc of radius " << radius << " around (" << kp.x << ", "
        << kp.y << ") leaves the image";
    throw BoundsError(msg.str());
  }
  std::int64_t m10 = 0, m01 = 0;
  const int r2 = radius * radius;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy > r2) continue;
      const int v = img(cx + dx, cy + dy);
      m10 += static_cast<std::int64_t>(dx) * v;
      m01 += static_cast<std::int64_t>(dy) * v;
    }
  }
  if (m10 == 0 && m01 == 0) return 0.f;
  return normalize_angle(std::atan2(static_cast<double>(m01), static_cast<double>(m10)));
}

std::vector<Keypoint> harris_detect(const GrayImage& img, const HarrisOptions& opts) {
  if (opts.levels < 1) throw ArgumentError("harris_detect: levels must be >= 1");
  if (opts.max_keypoints < 0)
    throw ArgumentError("harris_detect: max_keypoints must be >= 0");
  if (!(opts.pyramid_factor > 1.f))
    throw ArgumentError("harris_detect: pyramid factor must be > 1");

  std::vector<GrayImage> pyramid{img};
  for (int level = 1; level < opts.levels; ++level) {
    const double f = std::pow(static_cast<double>(opts.pyramid_factor), level);
    const auto w = static_cast<std::uint32_t>(std::lround(img.width() / f));
    const auto h = static_cast<std::uint32_t>(std::lround(img.height() / f));
    if (w < 64 || h < 64) break;
    pyramid.push_back(downsample(pyramid.back(), w, h));
  }
  if (static_cast<int>(pyramid.size()) < opts.levels || img.width() < 64 ||
      img.height() < 64) {
    std::ostringstream msg;
    msg << "harris_detect: " << img.width() << "x" << img.height()
        << " image is too small for " << opts.levels
        << " pyramid levels (coarsest level must be >= 64x64)";
    throw ArgumentError(msg.str());
  }

  std::vector<std::vector<Candidate>> per_level(pyramid.size());
  parallel_for(pyramid.size(), 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t level = begin; level < end; ++level) {
      const GrayImage& layer = pyramid[level];
      const int w = static_cast<int>(layer.width()), h = static_cast<int>(layer.height());
      const auto response = harris_response(layer, opts.k_harris, opts.tensor_sigma);
      const float peak = *std::max_element(response.begin(), response.end());
      if (!(peak > 0.f)) continue;
      const float threshold = opts.quality_level * peak;
      const float sx = static_cast<float>(img.width()) / w;
      const float sy = static_cast<float>(img.height()) / h;
      const auto at = [&](int x, int y) { return response[static_cast<std::size_t>(y) * w + x]; };
      for (int y = std::max(opts.border, 1); y < h - std::max(opts.border, 1); ++y) {
        for (int x = std::max(opts.border, 1); x < w - std::max(opts.border, 1); ++x) {
          const float r = at(x, y);
          if (!(r > threshold)) continue;
          // Plateaus keep only their first pixel in raster order.
          bool is_max = true;
          for (int dy = -1; dy <= 1 && is_max; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              if (dx == 0 && dy == 0) continue;
              const float n = at(x + dx, y + dy);
              const bool earlier = dy < 0 || (dy == 0 && dx < 0);
              if (earlier ? n >= r : n > r) {
                is_max = false;
                break;
              }
            }
          }
          if (!is_max) continue;
          Keypoint kp;
          kp.x = (x + 0.5f) * sx - 0.5f;
          kp.y = (y + 0.5f) * sy - 0.5f;
          kp.scale = std::pow(opts.pyramid_factor, static_cast<float>(level));
          kp.response = r;
          per_level[level].push_back({kp, static_cast<int>(level)});
        }
      }
    }
  });

  std::vector<Candidate> all;
  for (auto& level : per_level) all.insert(all.end(), level.begin(), level.end());
  std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
    if (a.kp.response != b.kp.response) return a.kp.response > b.kp.response;
    return std::tie(a.kp.y, a.kp.x, a.level) < std::tie(b.kp.y, b.kp.x, b.level);
  });
  if (all.size() > static_cast<std::size_t>(opts.max_keypoints))
    all.resize(static_cast<std::size_t>(opts.max_keypoints));

  std::vector<Keypoint> out;
  out.reserve(all.size());
  for (auto& c : all) {
    if (opts.compute_orientation)
      c.kp.orientation = intensity_centroid_orientation(img, c.kp, opts.orientation_radius);
    out.push_back(c.kp);
  }
  return out;
}

}  // namespace latch
