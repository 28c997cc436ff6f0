#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "latch/image.hpp"
#include "latch/learning.hpp"

namespace latch {

struct Point2d {
  double x = 0.0;
  double y = 0.0;
};

// Row-major 3x3 planar homography, normalized so h22 = 1 when h22 != 0.
class Homography {
 public:
  Homography();  // identity
  explicit Homography(const std::array<double, 9>& m);

  const std::array<double, 9>& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_[r * 3 + c]; }
  double determinant() const;
  Homography inverse() const;
  Homography operator*(const Homography& rhs) const;

 private:
  std::array<double, 9> m_;
};

// Homogeneous projection; throws ArgumentError when the point maps to infinity.
Point2d project(const Homography& h, Point2d p);

// Nine whitespace-separated numbers, row-major.
Homography read_homography_file(const std::string& path);
void write_homography_file(const std::string& path, const Homography& h);

struct OxfordSet {
  std::string name;
  std::array<GrayImage, 6> images;
  std::array<Homography, 5> homographies;  // image 1 -> image j+2
};

// dir/img1..img6 (.pgm, or .png when supported) and dir/H1to2p..H1to6p.
OxfordSet load_oxford(const std::string& dir);

struct BrownOptions {
  // Match file name inside the directory; empty picks the alphabetically
  // first m50_*.txt.
  std::string match_file;
  // Read at most this many match lines (0 = all).
  std::size_t max_pairs = 0;
};

inline constexpr int kBrownPatchSide = 64;
inline constexpr int kBrownMosaicSide = 1024;
inline constexpr int kBrownPatchesPerMosaic = 256;

// Brown/Winder patch data: patchesNNNN.pgm mosaics (16x16 grid of 64x64
// patches, row-major), info.txt (line i: 3-D point id of patch i) and an
// m50_*.txt match file (`patch1 point1 _ patch2 point2 _`, same iff the
// point ids agree). Only windows referenced by the loaded pairs are kept;
// patch_ids maps them back to global patch ids.
LabeledPairSet load_brown(const std::string& dir, const BrownOptions& opts = {});

// Writes a Brown-layout directory (mosaics, info.txt, match file) from
// windows with per-window point ids and pairs over them.
void write_brown(const std::string& dir, const std::vector<GrayImage>& patches,
                 const std::vector<std::uint32_t>& point_ids,
                 const std::vector<LabeledPair>& pairs,
                 const std::string& match_file = "m50_pairs.txt");

}  // namespace latch
