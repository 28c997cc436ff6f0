#include "latch/arrangement.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "latch/error.hpp"

namespace latch {

int max_offset(int patch_size, int window_side) {
  return window_side / 2 - (patch_size + 1) / 2;
}

void validate_triplet(const TripletArrangement& t, int patch_size, int window_side) {
  const int bound = max_offset(patch_size, window_side);
  for (Offset o : {t.anchor, t.first, t.second}) {
    if (std::abs(o.x) > bound || std::abs(o.y) > bound) {
      std::ostringstream msg;
      msg << "triplet offset (" << o.x << ", " << o.y << ") exceeds " << bound
          << " for " << patch_size << "x" << patch_size << " patches in a "
          << window_side << "-pixel window";
      throw ConfigError(msg.str());
    }
  }
  if (t.anchor == t.first || t.anchor == t.second || t.first == t.second)
    throw ConfigError("triplet offsets must be pairwise distinct");
}

namespace {

void validate_geometry(int patch_size, int window_side) {
  if (patch_size < 1 || patch_size % 2 == 0)
    throw ConfigError("patch size must be odd and >= 1, got " + std::to_string(patch_size));
  if (window_side < 2 || window_side % 2 != 0)
    throw ConfigError("window side must be even and >= 2, got " +
                      std::to_string(window_side));
  if (max_offset(patch_size, window_side) < 1)
    throw ConfigError("window too small for the patch size");
}

}  // namespace

ArrangementSet::ArrangementSet(std::vector<TripletArrangement> triplets, int patch_size,
                               int window_side)
    : triplets_(std::move(triplets)), patch_size_(patch_size), window_side_(window_side) {
  validate_geometry(patch_size, window_side);
  if (triplets_.empty() || triplets_.size() % 8 != 0)
    throw ConfigError("arrangement count must be a positive multiple of 8, got " +
                      std::to_string(triplets_.size()));
  for (const auto& t : triplets_) validate_triplet(t, patch_size, window_side);
}

ArrangementSet ArrangementSet::truncated(int bits) const {
  if (bits <= 0 || bits % 8 != 0 || bits > this->bits()) {
    std::ostringstream msg;
    msg << "cannot take " << bits << " bits from a " << this->bits()
        << "-triplet arrangement";
    throw ConfigError(msg.str());
  }
  return ArrangementSet({triplets_.begin(), triplets_.begin() + bits}, patch_size_,
                        window_side_);
}

ArrangementSet read_arrangement(std::istream& in) {
  std::string line;
  int line_no = 0;
  bool have_header = false;
  std::size_t expected = 0;
  int k = 0, side = 0;
  std::vector<TripletArrangement> triplets;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    const auto where = [&] { return "arrangement line " + std::to_string(line_no) + ": "; };
    if (!have_header) {
      std::string magic;
      int version = 0;
      long long count = 0;
      if (!(fields >> magic >> version >> count >> k >> side) || magic != "LATCH-ARR")
        throw DecodeError(where() + "expected `LATCH-ARR 1 <T> <k> <window_side>`");
      if (version != ArrangementSet::kVersion)
        throw DecodeError(where() + "unsupported version " + std::to_string(version));
      if (count <= 0) throw DecodeError(where() + "triplet count must be positive");
      expected = static_cast<std::size_t>(count);
      have_header = true;
    } else {
      TripletArrangement t;
      if (!(fields >> t.anchor.x >> t.anchor.y >> t.first.x >> t.first.y >> t.second.x >>
            t.second.y))
        throw DecodeError(where() + "expected `ax ay x1 y1 x2 y2`");
      std::string extra;
      if (fields >> extra) throw DecodeError(where() + "trailing data");
      triplets.push_back(t);
    }
  }
  if (!have_header) throw DecodeError("arrangement file has no LATCH-ARR header");
  if (triplets.size() != expected)
    throw DecodeError("arrangement header declares " + std::to_string(expected) +
                      " triplets, file has " + std::to_string(triplets.size()));
  return ArrangementSet(std::move(triplets), k, side);
}

ArrangementSet read_arrangement_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open arrangement file: " + path);
  try {
    return read_arrangement(in);
  } catch (const DecodeError& e) {
    throw DecodeError(path + ": " + e.what());
  }
}

void write_arrangement(std::ostream& out, const ArrangementSet& set) {
  out << "LATCH-ARR " << ArrangementSet::kVersion << ' ' << set.bits() << ' '
      << set.patch_size() << ' ' << set.window_side() << '\n';
  for (const auto& t : set.triplets())
    out << t.anchor.x << ' ' << t.anchor.y << ' ' << t.first.x << ' ' << t.first.y << ' '
        << t.second.x << ' ' << t.second.y << '\n';
}

void write_arrangement_file(const std::string& path, const ArrangementSet& set) {
  std::ofstream out(path);
  if (!out) throw LoadError("cannot write arrangement file: " + path);
  write_arrangement(out, set);
}

PairArrangementSet::PairArrangementSet(std::vector<PairArrangement> pairs, int window_side)
    : pairs_(std::move(pairs)), window_side_(window_side) {
  validate_geometry(1, window_side);
  if (pairs_.empty() || pairs_.size() % 8 != 0)
    throw ConfigError("pair count must be a positive multiple of 8");
  const int bound = max_offset(1, window_side);
  for (const auto& p : pairs_) {
    for (Offset o : {p.first, p.second})
      if (std::abs(o.x) > bound || std::abs(o.y) > bound)
        throw ConfigError("pair offset exceeds window bound");
    if (!(p.sigma_first > 0.f) || !(p.sigma_second > 0.f))
      throw ConfigError("pair smoothing sigmas must be > 0");
  }
}

}  // namespace latch
