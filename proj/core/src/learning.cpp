#include "latch/learning.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "latch/error.hpp"
#include "latch/parallel.hpp"
#include "latch/rng.hpp"

namespace latch {

std::size_t LabeledPairSet::same_count() const {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [](const LabeledPair& p) { return p.same; }));
}

void LabeledPairSet::validate() const {
  if (!patch_ids.empty() && patch_ids.size() != windows.size())
    throw ArgumentError("patch id list does not match window count");
  for (const auto& w : windows)
    if (w.width() != w.height() || w.width() != windows.front().width())
      throw ArgumentError("labeled pair windows must be equal-sized squares");
  for (const auto& p : pairs)
    if (p.a >= windows.size() || p.b >= windows.size())
      throw ArgumentError("labeled pair references window " +
                          std::to_string(std::max(p.a, p.b)) + " of " +
                          std::to_string(windows.size()));
}

LabeledPairSet smooth_windows(const LabeledPairSet& set, float sigma) {
  LabeledPairSet out = set;
  parallel_for(out.windows.size(), 256, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out.windows[i] = gaussian_smooth(set.windows[i], sigma);
  });
  return out;
}

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), words_((cols + 63) / 64), data_(rows * words_, 0) {}

CandidatePool generate_candidates(std::size_t n, int patch_size, int window_side,
                                  std::uint64_t seed) {
  if (n < 1) throw ArgumentError("generate_candidates: n must be >= 1");
  if (patch_size < 1 || patch_size % 2 == 0)
    throw ArgumentError("generate_candidates: patch size must be odd");
  const int bound = max_offset(patch_size, window_side);
  if (bound < 0) throw ArgumentError("generate_candidates: window too small for patch size");
  const double positions = std::pow(2.0 * bound + 1.0, 2.0);
  const double distinct = positions * (positions - 1) * (positions - 2);
  if (static_cast<double>(n) > distinct)
    throw ArgumentError("generate_candidates: " + std::to_string(n) +
                        " exceeds the number of distinct valid triplets");

  Rng rng(seed);
  CandidatePool pool;
  pool.patch_size = patch_size;
  pool.window_side = window_side;
  pool.seed = seed;
  pool.candidates.reserve(n);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(n * 2);
  const auto key = [](const TripletArrangement& t) {
    std::uint64_t k = 0;
    for (int v : {t.anchor.x, t.anchor.y, t.first.x, t.first.y, t.second.x, t.second.y})
      k = (k << 8) | static_cast<std::uint8_t>(static_cast<std::int8_t>(v));
    return k;
  };
  while (pool.candidates.size() < n) {
    TripletArrangement t;
    for (int* coord : {&t.anchor.x, &t.anchor.y, &t.first.x, &t.first.y, &t.second.x,
                       &t.second.y})
      *coord = static_cast<int>(rng.uniform_int(-bound, bound));
    if (t.anchor == t.first || t.anchor == t.second || t.first == t.second) continue;
    if (!seen.insert(key(t)).second) continue;
    pool.candidates.push_back(t);
  }
  return pool;
}

BitMatrix response_bits(const CandidatePool& pool, const LabeledPairSet& set) {
  set.validate();
  BitMatrix bits(pool.candidates.size(), set.windows.size());
  if (set.windows.empty()) return bits;
  const int side = static_cast<int>(set.windows.front().width());
  if (side < pool.window_side)
    throw ArgumentError("response_bits: windows are smaller than the arrangement window");
  const int origin = side / 2;
  const int k = pool.patch_size;
  constexpr std::size_t kWindowBlock = 256;  // ~1 MiB of 64x64 rasters
  parallel_for(pool.candidates.size(), 32, [&](std::size_t begin, std::size_t end) {
    for (std::size_t w0 = 0; w0 < set.windows.size(); w0 += kWindowBlock) {
      const std::size_t w1 = std::min(set.windows.size(), w0 + kWindowBlock);
      for (std::size_t c = begin; c < end; ++c) {
        const auto& t = pool.candidates[c];
        auto row = bits.row(c);
        for (std::size_t w = w0; w < w1; ++w) {
          const auto& raster = set.windows[w];
          const auto d1 = patch_ssd_unchecked(raster, origin, t.anchor, t.first, k);
          const auto d2 = patch_ssd_unchecked(raster, origin, t.anchor, t.second, k);
          if (d1 > d2) row[w / 64] |= std::uint64_t{1} << (w % 64);
        }
      }
    }
  });
  return bits;
}

std::uint32_t quality_score(std::span<const std::uint64_t> row, const LabeledPairSet& set) {
  std::uint32_t score = 0;
  const auto bit = [&](std::uint32_t w) { return (row[w / 64] >> (w % 64)) & 1u; };
  for (const auto& p : set.pairs) {
    const bool equal = bit(p.a) == bit(p.b);
    if (equal == p.same) ++score;
  }
  return score;
}

std::vector<std::uint32_t> quality_scores(const BitMatrix& bits, const LabeledPairSet& set) {
  std::vector<std::uint32_t> scores(bits.rows());
  parallel_for(bits.rows(), 64, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) scores[r] = quality_score(bits.row(r), set);
  });
  return scores;
}

namespace {

double pearson_from_counts(double n, double n1, double n2, double n11) {
  const double var = n1 * (n - n1) * n2 * (n - n2);
  if (var <= 0.0) return 0.0;
  return (n * n11 - n1 * n2) / std::sqrt(var);
}

std::size_t popcount(std::span<const std::uint64_t> words) {
  std::size_t total = 0;
  for (auto w : words) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

}  // namespace

double pearson_bit_correlation(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size())
    throw ArgumentError("pearson_bit_correlation: length mismatch");
  if (a.size() < 2) throw ArgumentError("pearson_bit_correlation: need at least 2 samples");
  double n1 = 0, n2 = 0, n11 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    n1 += a[i] != 0;
    n2 += b[i] != 0;
    n11 += (a[i] != 0) && (b[i] != 0);
  }
  return pearson_from_counts(static_cast<double>(a.size()), n1, n2, n11);
}

double pearson_bit_correlation(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                               std::size_t length) {
  if (a.size() != b.size())
    throw ArgumentError("pearson_bit_correlation: length mismatch");
  if (length < 2) throw ArgumentError("pearson_bit_correlation: need at least 2 samples");
  std::size_t n11 = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    n11 += static_cast<std::size_t>(std::popcount(a[i] & b[i]));
  return pearson_from_counts(static_cast<double>(length), static_cast<double>(popcount(a)),
                             static_cast<double>(popcount(b)), static_cast<double>(n11));
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Random: return "random";
    case Strategy::Unsupervised: return "unsupervised";
    case Strategy::Proposed: return "proposed";
    case Strategy::Combined: return "combined";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& name) {
  for (Strategy s : {Strategy::Random, Strategy::Unsupervised, Strategy::Proposed,
                     Strategy::Combined})
    if (to_string(s) == name) return s;
  throw ArgumentError("unknown strategy '" + name +
                      "' (expected random, unsupervised, proposed or combined)");
}

namespace {

void check_count(const CandidatePool& pool, std::size_t count) {
  if (count > pool.candidates.size())
    throw ArgumentError("cannot select " + std::to_string(count) + " of " +
                        std::to_string(pool.candidates.size()) + " candidates");
}

std::vector<std::size_t> rank_by_score(std::span<const std::uint32_t> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

// Walks the ranking, keeping candidates whose |corr| with every kept one is
// below tau; tops up in ranking order if fewer than count survive.
Selection greedy_decorrelate(const std::vector<std::size_t>& ranking, const BitMatrix& bits,
                             std::size_t count, double tau) {
  Selection sel;
  if (count == 0) return sel;
  const double n = static_cast<double>(bits.cols());
  std::vector<double> ones(bits.rows());
  for (std::size_t r = 0; r < bits.rows(); ++r) ones[r] = static_cast<double>(popcount(bits.row(r)));
  std::vector<char> taken(bits.rows(), 0);
  for (std::size_t cand : ranking) {
    if (sel.pool_indices.size() == count) break;
    const auto row = bits.row(cand);
    bool keep = true;
    for (std::size_t prev : sel.pool_indices) {
      const auto other = bits.row(prev);
      std::size_t n11 = 0;
      for (std::size_t i = 0; i < row.size(); ++i)
        n11 += static_cast<std::size_t>(std::popcount(row[i] & other[i]));
      const double corr =
          pearson_from_counts(n, ones[cand], ones[prev], static_cast<double>(n11));
      if (!(std::abs(corr) < tau)) {
        keep = false;
        break;
      }
    }
    if (keep) {
      sel.pool_indices.push_back(cand);
      taken[cand] = 1;
    }
  }
  sel.accepted_by_filter = sel.pool_indices.size();
  if (sel.pool_indices.size() < count) {
    sel.relaxed = true;
    for (std::size_t cand : ranking) {
      if (sel.pool_indices.size() == count) break;
      if (!taken[cand]) sel.pool_indices.push_back(cand);
    }
  }
  return sel;
}

}  // namespace

Selection select_proposed(const CandidatePool& pool, std::span<const std::uint32_t> scores,
                          std::size_t count) {
  check_count(pool, count);
  if (scores.size() != pool.candidates.size())
    throw ArgumentError("select_proposed: one score per candidate required");
  auto order = rank_by_score(scores);
  order.resize(count);
  Selection sel;
  sel.pool_indices = std::move(order);
  sel.accepted_by_filter = count;
  return sel;
}

Selection select_combined(const CandidatePool& pool, const BitMatrix& bits,
                          std::span<const std::uint32_t> scores, std::size_t count, double tau) {
  check_count(pool, count);
  if (scores.size() != pool.candidates.size() || bits.rows() != pool.candidates.size())
    throw ArgumentError("select_combined: scores/bits do not match the pool");
  return greedy_decorrelate(rank_by_score(scores), bits, count, tau);
}

Selection select_unsupervised(const CandidatePool& pool, const BitMatrix& bits,
                              std::size_t count, double tau) {
  check_count(pool, count);
  if (bits.rows() != pool.candidates.size())
    throw ArgumentError("select_unsupervised: bits do not match the pool");
  // |ones/n - 0.5| compared exactly as |2*ones - n|.
  std::vector<std::uint64_t> distance(bits.rows());
  const auto n = static_cast<std::int64_t>(bits.cols());
  for (std::size_t r = 0; r < bits.rows(); ++r) {
    const auto ones = static_cast<std::int64_t>(popcount(bits.row(r)));
    distance[r] = static_cast<std::uint64_t>(std::abs(2 * ones - n));
  }
  std::vector<std::size_t> order(bits.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return distance[a] < distance[b]; });
  return greedy_decorrelate(order, bits, count, tau);
}

Selection select_random(const CandidatePool& pool, std::size_t count, std::uint64_t seed) {
  check_count(pool, count);
  std::vector<std::size_t> idx(pool.candidates.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  Selection sel;
  sel.pool_indices = std::move(idx);
  sel.accepted_by_filter = count;
  return sel;
}

ArrangementSet make_arrangement(const CandidatePool& pool, const Selection& selection) {
  std::vector<TripletArrangement> triplets;
  triplets.reserve(selection.pool_indices.size());
  for (std::size_t i : selection.pool_indices) triplets.push_back(pool.candidates.at(i));
  return ArrangementSet(std::move(triplets), pool.patch_size, pool.window_side);
}

LearnResult learn_arrangement(const LabeledPairSet& set, const LearnOptions& opts) {
  if (opts.bits <= 0 || opts.bits % 8 != 0)
    throw ArgumentError("learn: bit count must be a positive multiple of 8");
  CandidatePool pool =
      generate_candidates(opts.candidates, opts.patch_size, opts.window_side, opts.seed);
  const auto count = static_cast<std::size_t>(opts.bits);
  Selection sel;
  std::vector<std::uint32_t> scores;
  if (opts.strategy == Strategy::Random) {
    // Scores are still reported for the chosen triplets.
    sel = select_random(pool, count, opts.seed ^ 0x5eed5eed5eed5eedULL);
    const BitMatrix bits = response_bits(pool, set);
    scores = quality_scores(bits, set);
  } else {
    const BitMatrix bits = response_bits(pool, set);
    scores = quality_scores(bits, set);
    switch (opts.strategy) {
      case Strategy::Proposed: sel = select_proposed(pool, scores, count); break;
      case Strategy::Combined: sel = select_combined(pool, bits, scores, count, opts.tau); break;
      case Strategy::Unsupervised: sel = select_unsupervised(pool, bits, count, opts.tau); break;
      case Strategy::Random: break;
    }
  }
  ArrangementSet arr = make_arrangement(pool, sel);
  return {std::move(pool), std::move(sel), std::move(scores), std::move(arr)};
}

void write_selection_report(std::ostream& out, const LearnResult& result,
                            const LearnOptions& opts, const LabeledPairSet& set) {
  out << "# LATCH arrangement selection report\n";
  out << "strategy " << to_string(opts.strategy) << '\n';
  out << "candidates " << result.pool.candidates.size() << '\n';
  out << "seed " << opts.seed << '\n';
  out << "tau " << opts.tau << '\n';
  out << "pairs " << set.pairs.size() << " same " << set.same_count() << " not_same "
      << set.not_same_count() << '\n';
  out << "windows " << set.windows.size() << '\n';
  out << "selected " << result.selection.pool_indices.size() << '\n';
  out << "accepted_by_filter " << result.selection.accepted_by_filter << '\n';
  out << "relaxed " << (result.selection.relaxed ? 1 : 0) << '\n';
  out << "# rank pool_index score ax ay x1 y1 x2 y2\n";
  for (std::size_t rank = 0; rank < result.selection.pool_indices.size(); ++rank) {
    const std::size_t idx = result.selection.pool_indices[rank];
    const auto& t = result.pool.candidates[idx];
    out << rank + 1 << ' ' << idx << ' '
        << (result.scores.empty() ? 0u : result.scores[idx]) << ' ' << t.anchor.x << ' '
        << t.anchor.y << ' ' << t.first.x << ' ' << t.first.y << ' ' << t.second.x << ' '
        << t.second.y << '\n';
  }
}

}  // namespace latch
