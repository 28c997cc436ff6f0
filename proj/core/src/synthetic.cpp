#include "latch/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <filesystem>
#include <numbers>

#include "latch/detector.hpp"
#include "latch/error.hpp"
#include "latch/image_io.hpp"
#include "latch/rng.hpp"

namespace fs = std::filesystem;

namespace latch::synthetic {
namespace {

double gaussian(Rng& rng) {
  // Box-Muller; one draw per call keeps the stream layout simple.
  const double u1 = std::max(rng.uniform01(), 1e-300);
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }

std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

// Value noise: random lattice values, bilinearly interpolated.
void add_value_noise(std::vector<double>& canvas, int w, int h, double cell, double amplitude,
                     Rng& rng) {
  const int gw = static_cast<int>(std::ceil(w / cell)) + 2;
  const int gh = static_cast<int>(std::ceil(h / cell)) + 2;
  std::vector<double> lattice(static_cast<std::size_t>(gw) * gh);
  for (auto& v : lattice) v = uniform(rng, -amplitude, amplitude);
  for (int y = 0; y < h; ++y) {
    const double gy = y / cell;
    const int y0 = static_cast<int>(gy);
    const double fy = gy - y0;
    const double sy = fy * fy * (3 - 2 * fy);
    for (int x = 0; x < w; ++x) {
      const double gx = x / cell;
      const int x0 = static_cast<int>(gx);
      const double fx = gx - x0;
      const double sx = fx * fx * (3 - 2 * fx);
      const auto at = [&](int xx, int yy) { return lattice[static_cast<std::size_t>(yy) * gw + xx]; };
      const double top = at(x0, y0) + sx * (at(x0 + 1, y0) - at(x0, y0));
      const double bot = at(x0, y0 + 1) + sx * (at(x0 + 1, y0 + 1) - at(x0, y0 + 1));
      canvas[static_cast<std::size_t>(y) * w + x] += top + sy * (bot - top);
    }
  }
}

bool inside_polygon(const std::vector<Point2d>& poly, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    if ((poly[i].y > y) != (poly[j].y > y) &&
        x < (poly[j].x - poly[i].x) * (y - poly[i].y) / (poly[j].y - poly[i].y) + poly[i].x)
      in = !in;
  }
  return in;
}

}  // namespace

GrayImage render_scene(std::uint32_t width, std::uint32_t height, std::uint64_t seed) {
  Rng rng(seed);
  const int w = static_cast<int>(width), h = static_cast<int>(height);
  std::vector<double> canvas(static_cast<std::size_t>(w) * h, uniform(rng, 90, 160));
  for (double cell : {96.0, 32.0, 12.0, 4.0})
    add_value_noise(canvas, w, h, cell, 40.0 * std::sqrt(cell / 96.0) + 6.0, rng);

  const int shapes = static_cast<int>(w * h / 1800);
  for (int s = 0; s < shapes; ++s) {
    const double cx = uniform(rng, 0, w), cy = uniform(rng, 0, h);
    const double size = std::exp(uniform(rng, std::log(4.0), std::log(40.0)));
    const double value = uniform(rng, 0, 255);
    const double alpha = uniform(rng, 0.5, 1.0);
    const int kind = static_cast<int>(rng.below(3));
    std::vector<Point2d> poly;
    if (kind == 0) {
      const int n = 3 + static_cast<int>(rng.below(4));
      const double phase = uniform(rng, 0, 2 * std::numbers::pi);
      for (int i = 0; i < n; ++i) {
        const double a = phase + 2 * std::numbers::pi * i / n + uniform(rng, -0.3, 0.3);
        const double r = size * uniform(rng, 0.5, 1.0);
        poly.push_back({cx + r * std::cos(a), cy + r * std::sin(a)});
      }
    }
    const double rx = size * uniform(rng, 0.4, 1.0), ry = size * uniform(rng, 0.4, 1.0);
    const double theta = uniform(rng, 0, std::numbers::pi);
    const double ct = std::cos(theta), st = std::sin(theta);
    const double thickness = uniform(rng, 1.0, 3.5);
    const double ex = cx + size * 2 * ct, ey = cy + size * 2 * st;
    const int x0 = std::max(0, static_cast<int>(cx - 2.5 * size - 4));
    const int x1 = std::min(w - 1, static_cast<int>(cx + 2.5 * size + 4));
    const int y0 = std::max(0, static_cast<int>(cy - 2.5 * size - 4));
    const int y1 = std::min(h - 1, static_cast<int>(cy + 2.5 * size + 4));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        bool hit = false;
        if (kind == 0) {
          hit = inside_polygon(poly, x, y);
        } else if (kind == 1) {
          const double dx = x - cx, dy = y - cy;
          const double u = (dx * ct + dy * st) / rx, v = (-dx * st + dy * ct) / ry;
          hit = u * u + v * v <= 1.0;
        } else {
          const double vx = ex - cx, vy = ey - cy;
          const double t = std::clamp(((x - cx) * vx + (y - cy) * vy) / (vx * vx + vy * vy), 0.0, 1.0);
          const double px = cx + t * vx - x, py = cy + t * vy - y;
          hit = px * px + py * py <= thickness * thickness;
        }
        if (hit) {
          auto& c = canvas[static_cast<std::size_t>(y) * w + x];
          c = (1 - alpha) * c + alpha * value;
        }
      }
    }
  }
  GrayImage img(width, height);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img(x, y) = clamp_u8(canvas[static_cast<std::size_t>(y) * w + x]);
  return gaussian_smooth(img, 0.7f);
}

PatchSet make_patch_set(const PatchSetOptions& opts) {
  if (opts.points < 2 || opts.views_per_point < 2)
    throw ArgumentError("make_patch_set: need >= 2 points and >= 2 views per point");
  Rng rng(opts.seed);
  PatchSet out;
  constexpr std::uint32_t kScene = 640;
  constexpr int kMargin = 72;
  std::uint64_t seed_state = opts.seed;
  std::uint64_t scene_seed = Rng::splitmix64(seed_state);

  struct Site {
    const GrayImage* scene;
    double x, y;
  };
  std::deque<GrayImage> scenes;  // stable addresses for Site::scene
  std::vector<Site> sites;
  while (sites.size() < opts.points) {
    scenes.push_back(render_scene(kScene, kScene, scene_seed++));
    const GrayImage& scene = scenes.back();
    HarrisOptions det;
    det.levels = 1;
    det.max_keypoints = 400;
    det.border = kMargin;
    det.compute_orientation = false;
    auto kps = harris_detect(scene, det);
    // Spread points: drop corners within 6 px of an accepted one.
    std::vector<Keypoint> kept;
    for (const auto& kp : kps) {
      bool close = false;
      for (const auto& k : kept)
        if (std::hypot(k.x - kp.x, k.y - kp.y) < 6.0) {
          close = true;
          break;
        }
      if (!close) kept.push_back(kp);
    }
    for (const auto& kp : kept) {
      if (sites.size() == opts.points) break;
      sites.push_back({&scene, kp.x, kp.y});
    }
    if (scenes.size() > opts.points) throw ArgumentError("make_patch_set: scenes yield no corners");
  }

  constexpr int kSide = kBrownPatchSide;
  const double deg = std::numbers::pi / 180.0;
  for (std::size_t p = 0; p < sites.size(); ++p) {
    const Site& site = sites[p];
    // A per-point reference orientation, shared by its views up to jitter,
    // mimics detector-normalized patches.
    const double base_angle = uniform(rng, 0, 2 * std::numbers::pi);
    for (int v = 0; v < opts.views_per_point; ++v) {
      const double angle = base_angle + gaussian(rng) * opts.rotation_sigma_deg * deg;
      const double scale = std::exp(gaussian(rng) * opts.log_scale_sigma);
      const double shear_x = gaussian(rng) * opts.shear_sigma;
      const double shear_y = gaussian(rng) * opts.shear_sigma;
      const double tx = gaussian(rng) * opts.shift_sigma, ty = gaussian(rng) * opts.shift_sigma;
      const double gain = uniform(rng, 1 - opts.gain_range, 1 + opts.gain_range);
      const double bias = uniform(rng, -opts.bias_range, opts.bias_range);
      const double blur = uniform(rng, 0, opts.max_blur_sigma);
      const double ca = std::cos(angle) * scale, sa = std::sin(angle) * scale;
      // A = s R (I + shear)
      const double a00 = ca + (-sa) * shear_y, a01 = ca * shear_x - sa;
      const double a10 = sa + ca * shear_y, a11 = sa * shear_x + ca;
      GrayImage patch(kSide, kSide);
      for (int y = 0; y < kSide; ++y) {
        for (int x = 0; x < kSide; ++x) {
          const double u = x - kSide / 2, w = y - kSide / 2;
          const double sx = std::clamp(site.x + tx + a00 * u + a01 * w, 0.0,
                                       static_cast<double>(kScene - 1));
          const double sy = std::clamp(site.y + ty + a10 * u + a11 * w, 0.0,
                                       static_cast<double>(kScene - 1));
          const double value = bilinear(*site.scene, static_cast<float>(sx), static_cast<float>(sy));
          patch(x, y) = clamp_u8(gain * value + bias);
        }
      }
      if (blur > 0.3) patch = gaussian_smooth(patch, static_cast<float>(blur));
      for (auto& px : patch.pixels()) px = clamp_u8(px + gaussian(rng) * opts.noise_sigma);
      out.patches.push_back(std::move(patch));
      out.point_ids.push_back(static_cast<std::uint32_t>(p));
    }
  }

  const auto views = static_cast<std::uint64_t>(opts.views_per_point);
  for (std::size_t i = 0; i < opts.pairs; ++i) {
    LabeledPair pair;
    if (i % 2 == 0) {
      const std::uint64_t p = rng.below(sites.size());
      const std::uint64_t v1 = rng.below(views);
      std::uint64_t v2 = rng.below(views - 1);
      if (v2 >= v1) ++v2;
      pair = {static_cast<std::uint32_t>(p * views + v1), static_cast<std::uint32_t>(p * views + v2),
              true};
    } else {
      const std::uint64_t p1 = rng.below(sites.size());
      std::uint64_t p2 = rng.below(sites.size() - 1);
      if (p2 >= p1) ++p2;
      pair = {static_cast<std::uint32_t>(p1 * views + rng.below(views)),
              static_cast<std::uint32_t>(p2 * views + rng.below(views)), false};
    }
    out.pairs.push_back(pair);
  }
  return out;
}

OxfordSet make_sequence(const SequenceOptions& opts) {
  Rng rng(opts.seed);
  const std::uint32_t pad = 64;
  const GrayImage scene = render_scene(opts.width + 2 * pad, opts.height + 2 * pad, rng());
  OxfordSet set;
  set.name = opts.name;
  const double cx = opts.width / 2.0, cy = opts.height / 2.0;
  for (int j = 0; j < 6; ++j) {
    Homography h;
    if (j > 0) {
      // Small similarity about the image center plus a weak perspective term.
      const double angle = uniform(rng, -3.0, 3.0) * std::numbers::pi / 180.0;
      const double s = 1.0 + uniform(rng, -0.04, 0.04);
      const double tx = uniform(rng, -12, 12), ty = uniform(rng, -12, 12);
      const double c = std::cos(angle) * s, si = std::sin(angle) * s;
      const double p0 = uniform(rng, -2e-5, 2e-5), p1 = uniform(rng, -2e-5, 2e-5);
      h = Homography({c, -si, cx - c * cx + si * cy + tx, si, c, cy - si * cx - c * cy + ty, p0,
                      p1, 1.0 - p0 * cx - p1 * cy});
      set.homographies[j - 1] = h;
    }
    const Homography inv = h.inverse();
    GrayImage img(opts.width, opts.height);
    const double gain = opts.degradation == Degradation::Light ? 1.0 - 0.13 * j : 1.0;
    for (std::uint32_t y = 0; y < opts.height; ++y) {
      for (std::uint32_t x = 0; x < opts.width; ++x) {
        const Point2d src = project(inv, {static_cast<double>(x), static_cast<double>(y)});
        const double sx = std::clamp(src.x + pad, 0.0, static_cast<double>(scene.width() - 1));
        const double sy = std::clamp(src.y + pad, 0.0, static_cast<double>(scene.height() - 1));
        const double v = bilinear(scene, static_cast<float>(sx), static_cast<float>(sy));
        img(x, y) = clamp_u8(gain * v);
      }
    }
    if (opts.degradation == Degradation::Blur && j > 0)
      img = gaussian_smooth(img, static_cast<float>(0.6 * j));
    for (auto& px : img.pixels()) px = clamp_u8(px + gaussian(rng) * 1.5);
    set.images[j] = std::move(img);
  }
  return set;
}

void write_oxford(const std::string& dir, const OxfordSet& set) {
  fs::create_directories(dir);
  for (int i = 0; i < 6; ++i)
    save_pgm((fs::path(dir) / ("img" + std::to_string(i + 1) + ".pgm")).string(), set.images[i]);
  for (int j = 0; j < 5; ++j)
    write_homography_file((fs::path(dir) / ("H1to" + std::to_string(j + 2) + "p")).string(),
                          set.homographies[j]);
}

}  // namespace latch::synthetic
