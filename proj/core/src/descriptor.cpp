#include "latch/descriptor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <optional>

#include "latch/error.hpp"
#include "latch/image_io.hpp"
#include "latch/parallel.hpp"

namespace latch {

int triplet_bit(const Window& win, const TripletArrangement& arr, int k) {
  return patch_ssd(win, arr.anchor, arr.first, k) > patch_ssd(win, arr.anchor, arr.second, k)
             ? 1
             : 0;
}

SmoothedWindows::SmoothedWindows(const Window& win)
    : window_(&win), origin_(win.origin()) {}

const GrayImage& SmoothedWindows::at(float sigma) {
  for (const auto& [s, img] : cache_)
    if (s == sigma) return img;
  cache_.emplace_back(sigma, gaussian_smooth(window_->raster, sigma));
  return cache_.back().second;
}

int pair_bit(SmoothedWindows& win, const PairArrangement& pair) {
  const GrayImage& a = win.at(pair.sigma_first);
  const int va = a(win.origin() + pair.first.x, win.origin() + pair.first.y);
  const GrayImage& b = win.at(pair.sigma_second);
  const int vb = b(win.origin() + pair.second.x, win.origin() + pair.second.y);
  return va > vb ? 1 : 0;
}

std::vector<std::uint8_t> pack_bits(std::span<const std::uint8_t> bits) {
  if (bits.size() % 8 != 0)
    throw ArgumentError("pack_bits: bit count " + std::to_string(bits.size()) +
                        " is not a multiple of 8");
  std::vector<std::uint8_t> out(bits.size() / 8, 0);
  for (std::size_t t = 0; t < bits.size(); ++t)
    if (bits[t]) out[t / 8] |= static_cast<std::uint8_t>(1u << (t % 8));
  return out;
}

std::vector<std::uint8_t> describe_window(const Window& win, const ArrangementSet& arrs,
                                          int bits) {
  if (win.side() < arrs.window_side())
    throw ConfigError("window raster is smaller than the arrangement window");
  const int k = arrs.patch_size();
  const int origin = win.origin();
  const auto& triplets = arrs.triplets();
  std::vector<std::uint8_t> out(static_cast<std::size_t>(bits) / 8, 0);
  for (int t = 0; t < bits; ++t) {
    const auto& tr = triplets[t];
    const auto d1 = patch_ssd_unchecked(win.raster, origin, tr.anchor, tr.first, k);
    const auto d2 = patch_ssd_unchecked(win.raster, origin, tr.anchor, tr.second, k);
    if (d1 > d2) out[t / 8] |= static_cast<std::uint8_t>(1u << (t % 8));
  }
  return out;
}

namespace {

void check_options(const ArrangementSet& arrs, const ExtractOptions& opts) {
  if (opts.patch_size != arrs.patch_size())
    throw ConfigError("arrangement patch size " + std::to_string(arrs.patch_size()) +
                      " does not match requested " + std::to_string(opts.patch_size));
  if (opts.window_side != arrs.window_side())
    throw ConfigError("arrangement window side " + std::to_string(arrs.window_side()) +
                      " does not match requested " + std::to_string(opts.window_side));
  if (opts.descriptor_bytes <= 0 || opts.descriptor_bytes * 8 > arrs.bits())
    throw ConfigError(std::to_string(opts.descriptor_bytes) + "-byte descriptors need " +
                      std::to_string(opts.descriptor_bytes * 8) +
                      " triplets, arrangement has " + std::to_string(arrs.bits()));
  if (opts.smoothing_sigma < 0.f) throw ConfigError("smoothing sigma must be >= 0");
  if (opts.smoothing_sigma > 0.f && opts.patch_size != 1)
    throw ConfigError("smoothing applies to the 1x1 variant only");
}

Keypoint sampling_pose(const Keypoint& kp, bool rotation_invariant, bool use_scale) {
  Keypoint pose = kp;
  if (!rotation_invariant) pose.orientation = 0.f;
  if (!use_scale) pose.scale = 1.f;
  return pose;
}

// Runs describe(kp) -> optional bytes over all keypoints in parallel and
// compacts the survivors in input order.
template <typename Describe>
ExtractResult extract_with(const std::vector<Keypoint>& kps, Describe&& describe) {
  std::vector<std::optional<std::vector<std::uint8_t>>> slots(kps.size());
  parallel_for(kps.size(), 64, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) slots[i] = describe(kps[i]);
  });
  ExtractResult result;
  for (std::size_t i = 0; i < kps.size(); ++i) {
    if (slots[i]) {
      result.descriptors.push_back({std::move(*slots[i]), kps[i]});
    } else {
      ++result.skipped;
    }
  }
  return result;
}

}  // namespace

ExtractResult extract_pixel_variant(const GrayImage& img, const std::vector<Keypoint>& kps,
                                    const ArrangementSet& arrs, float sigma,
                                    const ExtractOptions& opts) {
  ExtractOptions o = opts;
  o.smoothing_sigma = sigma;
  o.patch_size = 1;
  check_options(arrs, o);
  const int bits = o.descriptor_bytes * 8;
  const int margin = sigma > 0.f ? static_cast<int>(std::ceil(3.0f * sigma)) : 0;
  const int side = o.window_side + 2 * margin;
  return extract_with(kps, [&](const Keypoint& kp) -> std::optional<std::vector<std::uint8_t>> {
    const Keypoint pose = sampling_pose(kp, o.rotation_invariant, o.use_scale);
    if (!window_fits(img, pose, side)) return std::nullopt;
    Window win = sample_window(img, pose, side);
    if (sigma > 0.f) win.raster = gaussian_smooth(win.raster, sigma);
    return describe_window(win, arrs, bits);
  });
}

ExtractResult extract(const GrayImage& img, const std::vector<Keypoint>& kps,
                      const ArrangementSet& arrs, const ExtractOptions& opts) {
  check_options(arrs, opts);
  if (opts.smoothing_sigma > 0.f)
    return extract_pixel_variant(img, kps, arrs, opts.smoothing_sigma, opts);
  const int bits = opts.descriptor_bytes * 8;
  return extract_with(kps, [&](const Keypoint& kp) -> std::optional<std::vector<std::uint8_t>> {
    const Keypoint pose = sampling_pose(kp, opts.rotation_invariant, opts.use_scale);
    if (!window_fits(img, pose, opts.window_side)) return std::nullopt;
    return describe_window(sample_window(img, pose, opts.window_side), arrs, bits);
  });
}

ExtractResult extract_pairs(const GrayImage& img, const std::vector<Keypoint>& kps,
                            const PairArrangementSet& pairs, bool rotation_invariant) {
  float max_sigma = 0.f;
  for (const auto& p : pairs.pairs())
    max_sigma = std::max({max_sigma, p.sigma_first, p.sigma_second});
  const int margin = static_cast<int>(std::ceil(3.0f * max_sigma));
  const int side = pairs.window_side() + 2 * margin;
  return extract_with(kps, [&](const Keypoint& kp) -> std::optional<std::vector<std::uint8_t>> {
    const Keypoint pose = sampling_pose(kp, rotation_invariant, false);
    if (!window_fits(img, pose, side)) return std::nullopt;
    const Window win = sample_window(img, pose, side);
    SmoothedWindows smoothed(win);
    std::vector<std::uint8_t> bits(pairs.pairs().size());
    for (std::size_t t = 0; t < bits.size(); ++t)
      bits[t] = static_cast<std::uint8_t>(pair_bit(smoothed, pairs.pairs()[t]));
    return pack_bits(bits);
  });
}

namespace {

constexpr char kMagic[8] = {'L', 'T', 'C', 'H', 'D', 'E', 'S', 'C'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos + 4 > in.size())
    throw DecodeError("descriptor file truncated at byte offset " + std::to_string(pos));
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
  pos += 4;
  return v;
}

float get_f32(std::span<const std::uint8_t> in, std::size_t& pos) {
  return std::bit_cast<float>(get_u32(in, pos));
}

}  // namespace

std::vector<std::uint8_t> encode_descriptors(const std::vector<BinaryDescriptor>& descs,
                                             std::uint32_t bytes_per_descriptor) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, static_cast<std::uint32_t>(descs.size()));
  put_u32(out, bytes_per_descriptor);
  for (const auto& d : descs) {
    if (d.bits.size() != bytes_per_descriptor)
      throw ArgumentError("descriptor length " + std::to_string(d.bits.size()) +
                          " differs from declared " + std::to_string(bytes_per_descriptor));
    put_f32(out, d.keypoint.x);
    put_f32(out, d.keypoint.y);
    put_f32(out, d.keypoint.orientation);
    put_f32(out, d.keypoint.scale);
    out.insert(out.end(), d.bits.begin(), d.bits.end());
  }
  return out;
}

std::vector<BinaryDescriptor> decode_descriptors(std::span<const std::uint8_t> bytes,
                                                 std::uint32_t* bytes_per_descriptor) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw DecodeError("descriptor file: bad magic (expected LTCHDESC)");
  std::size_t pos = sizeof(kMagic);
  const std::uint32_t count = get_u32(bytes, pos);
  const std::uint32_t width = get_u32(bytes, pos);
  const std::size_t record = 16 + static_cast<std::size_t>(width);
  if ((bytes.size() - pos) / record < count)
    throw DecodeError("descriptor file truncated: header declares " + std::to_string(count) +
                      " records");
  std::vector<BinaryDescriptor> out(count);
  for (auto& d : out) {
    d.keypoint.x = get_f32(bytes, pos);
    d.keypoint.y = get_f32(bytes, pos);
    d.keypoint.orientation = get_f32(bytes, pos);
    d.keypoint.scale = get_f32(bytes, pos);
    d.bits.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                  bytes.begin() + static_cast<std::ptrdiff_t>(pos + width));
    pos += width;
  }
  if (pos != bytes.size())
    throw DecodeError("descriptor file has trailing bytes at offset " + std::to_string(pos));
  if (bytes_per_descriptor) *bytes_per_descriptor = width;
  return out;
}

void write_descriptor_file(const std::string& path,
                           const std::vector<BinaryDescriptor>& descs,
                           std::uint32_t bytes_per_descriptor) {
  write_file_bytes(path, encode_descriptors(descs, bytes_per_descriptor));
}

std::vector<BinaryDescriptor> read_descriptor_file(const std::string& path,
                                                   std::uint32_t* bytes_per_descriptor) {
  const auto bytes = read_file_bytes(path);
  try {
    return decode_descriptors(bytes, bytes_per_descriptor);
  } catch (const DecodeError& e) {
    throw DecodeError(path + ": " + e.what());
  }
}

}  // namespace latch
