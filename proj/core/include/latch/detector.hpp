#pragma once

#include <vector>

#include "latch/image.hpp"
#include "latch/keypoint.hpp"

namespace latch {

struct HarrisOptions {
  int max_keypoints = 1000;
  int levels = 3;
  float k_harris = 0.04f;
  float pyramid_factor = 1.5f;
  float tensor_sigma = 1.5f;
  // Keypoints closer than this to the border of their level are discarded.
  int border = 31;
  // Responses below quality_level * (max response of the level) are dropped.
  float quality_level = 0.01f;
  bool compute_orientation = true;
  int orientation_radius = 15;
};

// Multi-scale Harris corners. Results are in level-0 coordinates, sorted by
// descending response (ties by y, x, level), scale = pyramid_factor^level.
std::vector<Keypoint> harris_detect(const GrayImage& img, const HarrisOptions& opts = {});

// Per-pixel Harris response det(M) - k trace(M)^2 with 3x3 Sobel gradients and
// a Gaussian-weighted structure tensor. Row-major, same size as img.
std::vector<float> harris_response(const GrayImage& img, float k_harris,
                                   float tensor_sigma);

// atan2(m01, m10) over the disc of the given radius around the (rounded)
// keypoint position, in [0, 2*pi). Returns 0 when both moments vanish.
float intensity_centroid_orientation(const GrayImage& img, const Keypoint& kp,
                                     int radius);

// Downsamples by width/new_width, height/new_height with pixel-center
// alignment after light anti-alias smoothing.
GrayImage downsample(const GrayImage& img, std::uint32_t new_width,
                     std::uint32_t new_height);

}  // namespace latch
