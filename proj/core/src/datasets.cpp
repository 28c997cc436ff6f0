#include "latch/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "latch/error.hpp"
#include "latch/image_io.hpp"

namespace fs = std::filesystem;

namespace latch {

Homography::Homography() : m_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

Homography::Homography(const std::array<double, 9>& m) : m_(m) {
  if (m_[8] != 0.0) {
    const double s = m_[8];
    for (double& v : m_) v /= s;
  }
  if (!(std::abs(determinant()) > 1e-12))
    throw ArgumentError("homography is singular (|det| <= 1e-12)");
}

double Homography::determinant() const {
  const auto& a = m_;
  return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
         a[2] * (a[3] * a[7] - a[4] * a[6]);
}

Homography Homography::inverse() const {
  const auto& a = m_;
  const double det = determinant();
  std::array<double, 9> inv{
      (a[4] * a[8] - a[5] * a[7]) / det, (a[2] * a[7] - a[1] * a[8]) / det,
      (a[1] * a[5] - a[2] * a[4]) / det, (a[5] * a[6] - a[3] * a[8]) / det,
      (a[0] * a[8] - a[2] * a[6]) / det, (a[2] * a[3] - a[0] * a[5]) / det,
      (a[3] * a[7] - a[4] * a[6]) / det, (a[1] * a[6] - a[0] * a[7]) / det,
      (a[0] * a[4] - a[1] * a[3]) / det};
  return Homography(inv);
}

Homography Homography::operator*(const Homography& rhs) const {
  std::array<double, 9> out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < 3; ++k) out[r * 3 + c] += (*this)(r, k) * rhs(k, c);
  return Homography(out);
}

Point2d project(const Homography& h, Point2d p) {
  const double w = h(2, 0) * p.x + h(2, 1) * p.y + h(2, 2);
  if (!(std::abs(w) > 1e-12)) {
    std::ostringstream msg;
    msg << "point (" << p.x << ", " << p.y << ") projects to infinity";
    throw ArgumentError(msg.str());
  }
  return {(h(0, 0) * p.x + h(0, 1) * p.y + h(0, 2)) / w,
          (h(1, 0) * p.x + h(1, 1) * p.y + h(1, 2)) / w};
}

Homography read_homography_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("missing homography file: " + path);
  std::array<double, 9> m{};
  for (double& v : m)
    if (!(in >> v)) throw LoadError("homography file needs 9 numbers: " + path);
  try {
    return Homography(m);
  } catch (const ArgumentError& e) {
    throw LoadError(path + ": " + e.what());
  }
}

void write_homography_file(const std::string& path, const Homography& h) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write homography file: " + path);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int r = 0; r < 3; ++r)
    out << h(r, 0) << ' ' << h(r, 1) << ' ' << h(r, 2) << '\n';
}

namespace {

std::string find_image(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".pgm", ".png"}) {
    const fs::path p = dir / (stem + ext);
    if (fs::exists(p)) return p.string();
  }
  throw LoadError("missing image " + (dir / stem).string() + ".pgm" +
                  (png_supported() ? " (or .png)" : ""));
}

}  // namespace

OxfordSet load_oxford(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw LoadError("Oxford directory not found: " + dir);
  OxfordSet set;
  set.name = fs::path(dir).filename().string();
  if (set.name.empty()) set.name = fs::path(dir).parent_path().filename().string();
  for (int i = 0; i < 6; ++i)
    set.images[i] = load_image(find_image(root, "img" + std::to_string(i + 1)));
  for (int j = 0; j < 5; ++j)
    set.homographies[j] =
        read_homography_file((root / ("H1to" + std::to_string(j + 2) + "p")).string());
  return set;
}

namespace {

std::string mosaic_path(const fs::path& dir, std::size_t index) {
  std::ostringstream name;
  name << "patches" << std::setw(4) << std::setfill('0') << index;
  return find_image(dir, name.str());
}

}  // namespace

LabeledPairSet load_brown(const std::string& dir, const BrownOptions& opts) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw LoadError("Brown directory not found: " + dir);

  std::ifstream info(root / "info.txt");
  if (!info) throw LoadError("missing " + (root / "info.txt").string());
  std::size_t patch_count = 0;
  for (std::string line; std::getline(info, line);)
    if (line.find_first_not_of(" \t\r") != std::string::npos) ++patch_count;

  std::string match_name = opts.match_file;
  if (match_name.empty()) {
    std::vector<std::string> found;
    for (const auto& entry : fs::directory_iterator(root)) {
      const auto name = entry.path().filename().string();
      if (name.rfind("m50_", 0) == 0 && entry.path().extension() == ".txt")
        found.push_back(name);
    }
    if (found.empty()) throw LoadError("no m50_*.txt match file in " + dir);
    std::sort(found.begin(), found.end());
    match_name = found.front();
  }
  std::ifstream matches(root / match_name);
  if (!matches) throw LoadError("missing match file " + (root / match_name).string());

  LabeledPairSet set;
  std::map<std::uint32_t, std::uint32_t> local_of;  // global patch id -> window index
  std::vector<std::pair<std::uint32_t, std::uint32_t>> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(matches, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (opts.max_pairs && set.pairs.size() == opts.max_pairs) break;
    std::istringstream fields(line);
    long long p1, pt1, u1, p2, pt2, u2;
    if (!(fields >> p1 >> pt1 >> u1 >> p2 >> pt2 >> u2))
      throw LoadError(match_name + " line " + std::to_string(line_no) +
                      ": expected six integers");
    for (long long p : {p1, p2})
      if (p < 0 || static_cast<std::size_t>(p) >= patch_count)
        throw LoadError(match_name + " line " + std::to_string(line_no) + ": patch id " +
                        std::to_string(p) + " out of range (info.txt lists " +
                        std::to_string(patch_count) + " patches)");
    LabeledPair pair;
    for (auto [gid, slot] : {std::pair{p1, &pair.a}, std::pair{p2, &pair.b}}) {
      const auto id = static_cast<std::uint32_t>(gid);
      auto [it, inserted] = local_of.emplace(id, static_cast<std::uint32_t>(local_of.size()));
      *slot = it->second;
    }
    pair.same = pt1 == pt2;
    set.pairs.push_back(pair);
  }

  set.patch_ids.resize(local_of.size());
  for (auto [gid, local] : local_of) set.patch_ids[local] = gid;
  set.windows.resize(local_of.size());

  // Mosaics are visited in order and dropped after use.
  std::size_t loaded_index = static_cast<std::size_t>(-1);
  GrayImage mosaic;
  for (auto [gid, local] : local_of) {
    const std::size_t m = gid / kBrownPatchesPerMosaic;
    if (m != loaded_index) {
      const std::string path = mosaic_path(root, m);
      mosaic = load_image(path);
      if (mosaic.width() != kBrownMosaicSide || mosaic.height() != kBrownMosaicSide)
        throw LoadError(path + ": mosaic must be 1024x1024, got " +
                        std::to_string(mosaic.width()) + "x" + std::to_string(mosaic.height()));
      loaded_index = m;
    }
    const std::uint32_t cell = gid % kBrownPatchesPerMosaic;
    const int x0 = static_cast<int>(cell % 16) * kBrownPatchSide;
    const int y0 = static_cast<int>(cell / 16) * kBrownPatchSide;
    GrayImage patch(kBrownPatchSide, kBrownPatchSide);
    for (int y = 0; y < kBrownPatchSide; ++y)
      for (int x = 0; x < kBrownPatchSide; ++x) patch(x, y) = mosaic(x0 + x, y0 + y);
    set.windows[local] = std::move(patch);
  }
  return set;
}

void write_brown(const std::string& dir, const std::vector<GrayImage>& patches,
                 const std::vector<std::uint32_t>& point_ids,
                 const std::vector<LabeledPair>& pairs, const std::string& match_file) {
  if (patches.size() != point_ids.size())
    throw ArgumentError("write_brown: one point id per patch required");
  fs::create_directories(dir);
  const fs::path root(dir);
  const std::size_t mosaics =
      (patches.size() + kBrownPatchesPerMosaic - 1) / kBrownPatchesPerMosaic;
  for (std::size_t m = 0; m < mosaics; ++m) {
    GrayImage mosaic(kBrownMosaicSide, kBrownMosaicSide, 0);
    for (std::size_t cell = 0; cell < kBrownPatchesPerMosaic; ++cell) {
      const std::size_t idx = m * kBrownPatchesPerMosaic + cell;
      if (idx >= patches.size()) break;
      const auto& p = patches[idx];
      if (p.width() != kBrownPatchSide || p.height() != kBrownPatchSide)
        throw ArgumentError("write_brown: patches must be 64x64");
      const int x0 = static_cast<int>(cell % 16) * kBrownPatchSide;
      const int y0 = static_cast<int>(cell / 16) * kBrownPatchSide;
      for (int y = 0; y < kBrownPatchSide; ++y)
        for (int x = 0; x < kBrownPatchSide; ++x) mosaic(x0 + x, y0 + y) = p(x, y);
    }
    std::ostringstream name;
    name << "patches" << std::setw(4) << std::setfill('0') << m << ".pgm";
    save_pgm((root / name.str()).string(), mosaic);
  }
  std::ofstream info(root / "info.txt");
  for (auto id : point_ids) info << id << " 0\n";
  std::ofstream match(root / match_file);
  for (const auto& p : pairs) {
    if (p.a >= patches.size() || p.b >= patches.size())
      throw ArgumentError("write_brown: pair index out of range");
    match << p.a << ' ' << point_ids[p.a] << " 0 " << p.b << ' ' << point_ids[p.b] << " 0\n";
  }
  if (!info || !match) throw LoadError("write_brown: failed writing " + dir);
}

}  // namespace latch
