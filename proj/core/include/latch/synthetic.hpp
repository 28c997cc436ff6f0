#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "latch/datasets.hpp"
#include "latch/image.hpp"
#include "latch/learning.hpp"

namespace latch::synthetic {

// Procedural textured scene: multi-octave value noise overlaid with random
// polygons, ellipses and strokes, lightly anti-aliased.
GrayImage render_scene(std::uint32_t width, std::uint32_t height, std::uint64_t seed);

struct PatchSetOptions {
  std::size_t points = 2000;        // distinct scene points
  int views_per_point = 3;
  std::size_t pairs = 10000;        // half same, half not-same
  std::uint64_t seed = 1;
  // Geometric jitter between views of one point. The defaults put a random
  // 256-bit arrangement near AUC 0.87, the level reported on the real data.
  double rotation_sigma_deg = 17.5;
  double log_scale_sigma = 0.175;
  double shear_sigma = 0.05;
  double shift_sigma = 2.5;
  // Photometric jitter.
  double gain_range = 0.25;         // gain uniform in [1 - r, 1 + r]
  double bias_range = 20.0;
  double noise_sigma = 7.0;
  double max_blur_sigma = 1.2;
};

struct PatchSet {
  std::vector<GrayImage> patches;          // 64x64
  std::vector<std::uint32_t> point_ids;    // per patch
  std::vector<LabeledPair> pairs;          // over patch indices
};

// Multi-view patches around Harris corners of random scenes, labeled like
// the Brown data: same iff both patches show the same scene point.
PatchSet make_patch_set(const PatchSetOptions& opts);

inline LabeledPairSet to_labeled_pairs(const PatchSet& p) {
  LabeledPairSet set;
  set.windows = p.patches;
  set.pairs = p.pairs;
  return set;
}

enum class Degradation { Blur, Light };

struct SequenceOptions {
  std::uint32_t width = 480;
  std::uint32_t height = 384;
  Degradation degradation = Degradation::Blur;
  std::uint64_t seed = 1;
  std::string name = "synthetic";
};

// Six images related by known near-identity homographies, with degradation
// growing from image 2 to image 6 (blur or darkening).
OxfordSet make_sequence(const SequenceOptions& opts);

// Writes img1..img6.pgm and H1to2p..H1to6p.
void write_oxford(const std::string& dir, const OxfordSet& set);

}  // namespace latch::synthetic
