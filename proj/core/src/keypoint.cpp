#include "latch/keypoint.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "latch/error.hpp"

namespace latch {

float normalize_angle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(radians, two_pi);
  if (a < 0) a += two_pi;
  auto f = static_cast<float>(a);
  // fmod can land exactly on 2*pi after the float conversion.
  if (f >= static_cast<float>(two_pi)) f = 0.f;
  return f;
}

std::vector<Keypoint> read_keypoints(std::istream& in) {
  std::vector<Keypoint> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    Keypoint kp;
    if (!(fields >> kp.x)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw DecodeError("keypoint line " + std::to_string(line_no) + ": expected x");
    }
    if (!(fields >> kp.y >> kp.orientation >> kp.scale >> kp.response))
      throw DecodeError("keypoint line " + std::to_string(line_no) +
                        ": expected `x y orientation scale response`");
    std::string extra;
    if (fields >> extra)
      throw DecodeError("keypoint line " + std::to_string(line_no) + ": trailing data");
    out.push_back(kp);
  }
  return out;
}

std::vector<Keypoint> read_keypoints_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open keypoint file: " + path);
  return read_keypoints(in);
}

void write_keypoints(std::ostream& out, const std::vector<Keypoint>& keypoints) {
  out << "# x y orientation scale response\n";
  out << std::setprecision(std::numeric_limits<float>::max_digits10);
  for (const auto& kp : keypoints)
    out << kp.x << ' ' << kp.y << ' ' << kp.orientation << ' ' << kp.scale << ' '
        << kp.response << '\n';
}

void write_keypoints_file(const std::string& path,
                          const std::vector<Keypoint>& keypoints) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write keypoint file: " + path);
  write_keypoints(out, keypoints);
}

}  // namespace latch
