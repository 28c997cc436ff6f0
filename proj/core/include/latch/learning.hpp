#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "latch/arrangement.hpp"
#include "latch/image.hpp"

namespace latch {

struct LabeledPair {
  std::uint32_t a = 0;  // index into LabeledPairSet::windows
  std::uint32_t b = 0;
  bool same = false;
};

// Square patch windows (64x64 for the Brown data) and labeled pairs over them.
struct LabeledPairSet {
  std::vector<GrayImage> windows;
  // Dataset-global id of each window; empty when windows are not from a file.
  std::vector<std::uint32_t> patch_ids;
  std::vector<LabeledPair> pairs;

  std::size_t same_count() const;
  std::size_t not_same_count() const { return pairs.size() - same_count(); }
  // Throws ArgumentError on out-of-range indices or non-square / mismatched windows.
  void validate() const;
};

// Copy of the set with every window Gaussian-smoothed (used for the 1x1
// variant, which samples smoothed pixels).
LabeledPairSet smooth_windows(const LabeledPairSet& set, float sigma);

struct CandidatePool {
  std::vector<TripletArrangement> candidates;
  int patch_size = 7;
  int window_side = 48;
  std::uint64_t seed = 0;
};

// rows x cols bits, rows packed into 64-bit words (bit c at word c/64, bit c%64).
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t words_per_row() const { return words_; }

  bool get(std::size_t r, std::size_t c) const {
    return (data_[r * words_ + c / 64] >> (c % 64)) & 1u;
  }
  void set(std::size_t r, std::size_t c, bool v) {
    auto& w = data_[r * words_ + c / 64];
    const std::uint64_t mask = std::uint64_t{1} << (c % 64);
    w = v ? (w | mask) : (w & ~mask);
  }
  std::span<const std::uint64_t> row(std::size_t r) const {
    return {data_.data() + r * words_, words_};
  }
  std::span<std::uint64_t> row(std::size_t r) { return {data_.data() + r * words_, words_}; }

 private:
  std::size_t rows_ = 0, cols_ = 0, words_ = 0;
  std::vector<std::uint64_t> data_;
};

// n distinct random triplets, every coordinate uniform over the valid
// offsets, rejecting coincident centers and duplicates.
CandidatePool generate_candidates(std::size_t n, int patch_size, int window_side,
                                  std::uint64_t seed);

// bit(c, w) = triplet test of candidate c on window w, the window being the
// window_side center crop of the set's raster.
BitMatrix response_bits(const CandidatePool& pool, const LabeledPairSet& set);

// Same-labeled pairs with equal bits plus not-same pairs with different bits.
std::uint32_t quality_score(std::span<const std::uint64_t> bit_row, const LabeledPairSet& set);
std::vector<std::uint32_t> quality_scores(const BitMatrix& bits, const LabeledPairSet& set);

// Pearson correlation of two 0/1 vectors; 0 when either is constant.
double pearson_bit_correlation(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
double pearson_bit_correlation(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                               std::size_t length);

enum class Strategy { Random, Unsupervised, Proposed, Combined };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& name);

struct Selection {
  std::vector<std::size_t> pool_indices;  // in selection order
  // The decorrelation filter accepted fewer than T candidates and the rest
  // was filled in ranking order.
  bool relaxed = false;
  std::size_t accepted_by_filter = 0;
};

// Top T by descending score, ties by pool index.
Selection select_proposed(const CandidatePool& pool, std::span<const std::uint32_t> scores,
                          std::size_t count);

// Score ranking plus greedy decorrelation: accept iff |corr| < tau against
// every accepted candidate.
Selection select_combined(const CandidatePool& pool, const BitMatrix& bits,
                          std::span<const std::uint32_t> scores, std::size_t count, double tau);

// Label-free ranking by |mean bit - 0.5| ascending, then the same greedy
// decorrelation.
Selection select_unsupervised(const CandidatePool& pool, const BitMatrix& bits,
                              std::size_t count, double tau);

// count candidates uniformly without replacement (partial Fisher-Yates).
Selection select_random(const CandidatePool& pool, std::size_t count, std::uint64_t seed);

ArrangementSet make_arrangement(const CandidatePool& pool, const Selection& selection);

struct LearnOptions {
  Strategy strategy = Strategy::Combined;
  std::size_t candidates = 5000;
  int bits = 256;
  int patch_size = 7;
  int window_side = 48;
  double tau = 0.2;
  std::uint64_t seed = 1;
};

struct LearnResult {
  CandidatePool pool;
  Selection selection;
  std::vector<std::uint32_t> scores;  // per pool candidate (empty for Random)
  ArrangementSet arrangement;
};

// generate_candidates -> response_bits -> quality_scores -> select_*.
LearnResult learn_arrangement(const LabeledPairSet& set, const LearnOptions& opts);

// Text report: strategy, tau, relaxation flag, then one line per selected
// triplet with its rank, pool index and score.
void write_selection_report(std::ostream& out, const LearnResult& result,
                            const LearnOptions& opts, const LabeledPairSet& set);

}  // namespace latch
