#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "latch/arrangement.hpp"
#include "latch/image.hpp"
#include "latch/keypoint.hpp"

namespace latch {

// Packed bit string; bit t (0-based) lives at bit t % 8 of byte t / 8.
struct BinaryDescriptor {
  std::vector<std::uint8_t> bits;
  Keypoint keypoint;
};

struct ExtractOptions {
  int descriptor_bytes = 32;
  int patch_size = 7;
  int window_side = 48;
  bool rotation_invariant = true;
  // Honour keypoint scale when sampling the window. Off: every window is
  // sampled at scale 1.
  bool use_scale = false;
  // Pre-smoothing for the 1x1 variant; 0 disables it. Only valid with k = 1.
  float smoothing_sigma = 0.f;
};

struct ExtractResult {
  std::vector<BinaryDescriptor> descriptors;
  std::size_t skipped = 0;  // keypoints whose window left the image
};

// 1 iff SSD(anchor, first) > SSD(anchor, second); ties give 0.
int triplet_bit(const Window& win, const TripletArrangement& arr, int k);

// Windows pre-smoothed once per distinct sigma, shared by all pair tests.
class SmoothedWindows {
 public:
  explicit SmoothedWindows(const Window& win);
  const GrayImage& at(float sigma);
  int origin() const { return origin_; }

 private:
  const Window* window_;
  int origin_;
  std::vector<std::pair<float, GrayImage>> cache_;
};

// 1 iff smoothed intensity at first > smoothed intensity at second.
int pair_bit(SmoothedWindows& win, const PairArrangement& pair);

// bits holds one 0/1 value per test; length must be a multiple of 8.
std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits);

// Bits of one window under the first `bits` triplets of arrs. The raster's
// center cell is side/2; it may be larger than the arrangement window.
std::vector<std::uint8_t> describe_window(const Window& win, const ArrangementSet& arrs,
                                          int bits);

// Patch-triplet descriptors. Keypoints whose window leaves the image are
// skipped; output order follows input order.
ExtractResult extract(const GrayImage& img, const std::vector<Keypoint>& kps,
                      const ArrangementSet& arrs, const ExtractOptions& opts = {});

// The 1x1 ablation: every "patch" is one pixel of the window smoothed with
// sigma (sigma 0 = no smoothing).
ExtractResult extract_pixel_variant(const GrayImage& img, const std::vector<Keypoint>& kps,
                                    const ArrangementSet& arrs, float sigma,
                                    const ExtractOptions& opts = {});

// Pixel-pair baseline with per-pair smoothing.
ExtractResult extract_pairs(const GrayImage& img, const std::vector<Keypoint>& kps,
                            const PairArrangementSet& pairs, bool rotation_invariant = true);

// Binary descriptor file: magic "LTCHDESC", u32 count, u32 bytes per
// descriptor, then per record f32 x, y, orientation, scale and the bytes.
// Little-endian throughout. Keypoint response is not stored.
std::vector<std::uint8_t> encode_descriptors(const std::vector<BinaryDescriptor>& descs,
                                             std::uint32_t bytes_per_descriptor);
std::vector<BinaryDescriptor> decode_descriptors(std::span<const std::uint8_t> bytes,
                                                 std::uint32_t* bytes_per_descriptor = nullptr);
void write_descriptor_file(const std::string& path,
                           const std::vector<BinaryDescriptor>& descs,
                           std::uint32_t bytes_per_descriptor);
std::vector<BinaryDescriptor> read_descriptor_file(const std::string& path,
                                                   std::uint32_t* bytes_per_descriptor = nullptr);

}  // namespace latch
