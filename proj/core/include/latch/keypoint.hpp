#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace latch {

struct Keypoint {
  float x = 0.f;            // subpixel column
  float y = 0.f;            // subpixel row
  float orientation = 0.f;  // radians, [0, 2*pi)
  float scale = 1.f;
  float response = 0.f;
};

// Wraps an angle into [0, 2*pi).
float normalize_angle(double radians);

// Keypoint text format: one `x y orientation scale response` per line,
// '#' starts a comment. Writing uses round-trippable float formatting.
std::vector<Keypoint> read_keypoints(std::istream& in);
std::vector<Keypoint> read_keypoints_file(const std::string& path);
void write_keypoints(std::ostream& out, const std::vector<Keypoint>& keypoints);
void write_keypoints_file(const std::string& path,
                          const std::vector<Keypoint>& keypoints);

}  // namespace latch
