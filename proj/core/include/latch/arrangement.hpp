#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "latch/image.hpp"

namespace latch {

// One descriptor bit: the anchor patch is compared against two companions.
struct TripletArrangement {
  Offset anchor;
  Offset first;
  Offset second;
  friend bool operator==(const TripletArrangement&, const TripletArrangement&) = default;
};

// Largest |offset| coordinate whose k x k patch still fits a window of the
// given side: side/2 - ceil(k/2).
int max_offset(int patch_size, int window_side);

// Throws ConfigError unless the triplet's three patch footprints fit and its
// three centers are pairwise distinct.
void validate_triplet(const TripletArrangement& t, int patch_size, int window_side);

// The ordered sampling pattern. Bit t of a descriptor comes from triplet t.
class ArrangementSet {
 public:
  static constexpr int kVersion = 1;

  ArrangementSet(std::vector<TripletArrangement> triplets, int patch_size = 7,
                 int window_side = 48);

  const std::vector<TripletArrangement>& triplets() const { return triplets_; }
  int patch_size() const { return patch_size_; }
  int window_side() const { return window_side_; }
  int bits() const { return static_cast<int>(triplets_.size()); }

  // The first `bits` triplets; selection order is quality order, so this is
  // how shorter descriptors are produced.
  ArrangementSet truncated(int bits) const;

  friend bool operator==(const ArrangementSet&, const ArrangementSet&) = default;

 private:
  std::vector<TripletArrangement> triplets_;
  int patch_size_;
  int window_side_;
};

// Text format: `LATCH-ARR 1 <T> <k> <window_side>` then T lines
// `ax ay x1 y1 x2 y2`; '#' starts a comment.
ArrangementSet read_arrangement(std::istream& in);
ArrangementSet read_arrangement_file(const std::string& path);
void write_arrangement(std::ostream& out, const ArrangementSet& set);
void write_arrangement_file(const std::string& path, const ArrangementSet& set);

// Pixel-pair sampling pattern for the smoothed-intensity baseline.
struct PairArrangement {
  Offset first;
  Offset second;
  float sigma_first = 2.f;
  float sigma_second = 2.f;
};

class PairArrangementSet {
 public:
  PairArrangementSet(std::vector<PairArrangement> pairs, int window_side = 48);

  const std::vector<PairArrangement>& pairs() const { return pairs_; }
  int window_side() const { return window_side_; }
  int bits() const { return static_cast<int>(pairs_.size()); }

 private:
  std::vector<PairArrangement> pairs_;
  int window_side_;
};

}  // namespace latch
