#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "latch/descriptor.hpp"
#include "latch/error.hpp"
#include "latch/learning.hpp"
#include "latch/parallel.hpp"
#include "latch/rng.hpp"
#include "test_util.hpp"

namespace latch {
namespace {

LabeledPairSet toy_set(std::size_t windows, std::size_t pairs, std::uint32_t seed) {
  LabeledPairSet set;
  std::mt19937 gen(seed);
  for (std::size_t i = 0; i < windows; ++i)
    set.windows.push_back(testing::random_image(64, 64, seed * 1000 + static_cast<std::uint32_t>(i)));
  std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(windows - 1));
  for (std::size_t i = 0; i < pairs; ++i) set.pairs.push_back({pick(gen), pick(gen), i % 3 == 0});
  return set;
}

// Bit matrix built from explicit rows of 0/1 values.
BitMatrix matrix_of(const std::vector<std::vector<int>>& rows) {
  BitMatrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) m.set(r, c, rows[r][c] != 0);
  return m;
}

std::vector<std::uint8_t> row_values(const BitMatrix& m, std::size_t r) {
  std::vector<std::uint8_t> v(m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) v[c] = m.get(r, c);
  return v;
}

// Textbook Pearson over doubles.
double pearson_oracle(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) return 0;
  return sab / std::sqrt(saa * sbb);
}

// Greedy rule restated directly over a ranking.
std::vector<std::size_t> greedy_oracle(const std::vector<std::size_t>& ranking, const BitMatrix& m,
                                       std::size_t count, double tau) {
  std::vector<std::size_t> kept;
  for (std::size_t c : ranking) {
    bool ok = true;
    for (std::size_t k : kept)
      if (std::abs(pearson_oracle(row_values(m, c), row_values(m, k))) >= tau) ok = false;
    if (ok) kept.push_back(c);
    if (kept.size() == count) return kept;
  }
  for (std::size_t c : ranking)
    if (kept.size() < count && std::find(kept.begin(), kept.end(), c) == kept.end())
      kept.push_back(c);
  return kept;
}

CandidatePool pool_of(std::size_t n) {
  return generate_candidates(n, 7, 48, 77);
}

TEST(Candidates, DeterministicBoundedDistinct) {
  EXPECT_EQ(generate_candidates(1, 7, 48, 5).candidates, generate_candidates(1, 7, 48, 5).candidates);
  EXPECT_NE(generate_candidates(4, 7, 48, 5).candidates, generate_candidates(4, 7, 48, 6).candidates);
  const auto pool = generate_candidates(56000, 7, 48, 1);
  ASSERT_EQ(pool.candidates.size(), 56000u);
  std::set<std::tuple<int, int, int, int, int, int>> seen;
  for (const auto& t : pool.candidates) {
    for (int v : {t.anchor.x, t.anchor.y, t.first.x, t.first.y, t.second.x, t.second.y})
      ASSERT_LE(std::abs(v), 20);
    ASSERT_NE(t.anchor, t.first);
    ASSERT_NE(t.anchor, t.second);
    ASSERT_NE(t.first, t.second);
    seen.insert({t.anchor.x, t.anchor.y, t.first.x, t.first.y, t.second.x, t.second.y});
  }
  EXPECT_EQ(seen.size(), 56000u);
}

TEST(Candidates, RejectsImpossibleRequests) {
  // k = 47 leaves a single position per axis: no triplet has distinct centers.
  EXPECT_THROW(generate_candidates(1, 47, 48, 1), ArgumentError);
  // k = 45: 3x3 positions, 9*8*7 = 504 distinct triplets.
  EXPECT_EQ(generate_candidates(504, 45, 48, 1).candidates.size(), 504u);
  EXPECT_THROW(generate_candidates(505, 45, 48, 1), ArgumentError);
  EXPECT_THROW(generate_candidates(0, 7, 48, 1), ArgumentError);
}

TEST(Rng, MatchesReferenceSequence) {
  // Seed 0: SplitMix64 outputs feed xoshiro256**; first values frozen from
  // an independent implementation of the published reference code.
  std::uint64_t sm = 0;
  EXPECT_EQ(Rng::splitmix64(sm), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(Rng::splitmix64(sm), 0x6e789e6aa1b965f4ULL);
  Rng rng(0);
  const std::uint64_t first = rng();
  std::uint64_t s[4];
  std::uint64_t x = 0;
  for (auto& v : s) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    v = z ^ (z >> 31);
  }
  const std::uint64_t m = s[1] * 5;
  EXPECT_EQ(first, ((m << 7) | (m >> 57)) * 9);
}

TEST(ResponseBits, MatchesBruteForce) {
  const auto set = toy_set(20, 10, 3);
  const auto pool = generate_candidates(10, 7, 48, 2);
  const auto bits = response_bits(pool, set);
  ASSERT_EQ(bits.rows(), 10u);
  ASSERT_EQ(bits.cols(), 20u);
  for (std::size_t c = 0; c < 10; ++c)
    for (std::size_t w = 0; w < 20; ++w) {
      // Naive: crop the central 48x48 and compute both SSDs by hand.
      const auto& t = pool.candidates[c];
      const auto& img = set.windows[w];
      const auto ssd = [&](Offset a, Offset b) {
        long total = 0;
        for (int dy = -3; dy <= 3; ++dy)
          for (int dx = -3; dx <= 3; ++dx) {
            const int d = img(8 + 24 + a.x + dx, 8 + 24 + a.y + dy) - img(8 + 24 + b.x + dx, 8 + 24 + b.y + dy);
            total += d * d;
          }
        return total;
      };
      const bool expected = ssd(t.anchor, t.first) > ssd(t.anchor, t.second);
      ASSERT_EQ(bits.get(c, w), expected) << c << ' ' << w;
      // Same cell through the descriptor module.
      GrayImage crop(48, 48);
      for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x) crop(x, y) = img(x + 8, y + 8);
      ASSERT_EQ(bits.get(c, w), triplet_bit(window_from_raster(crop), t, 7) == 1);
    }
}

TEST(ResponseBits, ConstantWindowsAndThreadIndependence) {
  LabeledPairSet flat;
  flat.windows.assign(5, GrayImage(64, 64, 90));
  const auto pool = pool_of(100);
  const auto bits = response_bits(pool, flat);
  for (std::size_t c = 0; c < 100; ++c)
    for (std::size_t w = 0; w < 5; ++w) EXPECT_FALSE(bits.get(c, w));

  const auto set = toy_set(70, 0, 9);
  set_max_threads(1);
  const auto one = response_bits(pool, set);
  set_max_threads(3);
  const auto three = response_bits(pool, set);
  set_max_threads(0);
  for (std::size_t c = 0; c < 100; ++c)
    ASSERT_TRUE(std::ranges::equal(one.row(c), three.row(c)));
}

TEST(QualityScore, ConstantAndPerfectCandidates) {
  LabeledPairSet set;
  set.windows.assign(6, GrayImage(64, 64, 0));
  set.pairs = {{0, 1, true}, {2, 3, false}, {4, 5, true}, {0, 5, false}, {1, 2, true}};
  const auto constant = matrix_of({{1, 1, 1, 1, 1, 1}});
  EXPECT_EQ(quality_score(constant.row(0), set), 3u);
  // Agrees on (0,1), (4,5), (1,2) and differs on (2,3), (0,5).
  const auto perfect = matrix_of({{1, 1, 1, 0, 0, 0}});
  EXPECT_EQ(quality_score(perfect.row(0), set), 5u);
}

TEST(QualityScore, MatchesRecountAndIsComplementInvariant) {
  const auto set = toy_set(30, 50, 4);
  const auto pool = generate_candidates(8, 7, 48, 4);
  const auto bits = response_bits(pool, set);
  const auto scores = quality_scores(bits, set);
  for (std::size_t c = 0; c < 8; ++c) {
    std::uint32_t recount = 0;
    for (const auto& p : set.pairs) {
      const bool a = bits.get(c, p.a), b = bits.get(c, p.b);
      if (p.same ? a == b : a != b) ++recount;
    }
    EXPECT_EQ(scores[c], recount);
  }
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    BitMatrix m(1, 30), flipped(1, 30);
    for (std::size_t w = 0; w < 30; ++w) {
      const bool v = rng() & 1;
      m.set(0, w, v);
      flipped.set(0, w, !v);
    }
    ASSERT_EQ(quality_score(m.row(0), set), quality_score(flipped.row(0), set));
  }
}

TEST(Pearson, Examples) {
  const std::vector<std::uint8_t> a{1, 1, 0, 0}, b{1, 0, 1, 0}, na{0, 0, 1, 1}, c{1, 1, 1, 1};
  EXPECT_DOUBLE_EQ(pearson_bit_correlation(a, a), 1.0);
  EXPECT_DOUBLE_EQ(pearson_bit_correlation(a, na), -1.0);
  EXPECT_DOUBLE_EQ(pearson_bit_correlation(a, b), 0.0);
  EXPECT_DOUBLE_EQ(pearson_bit_correlation(a, c), 0.0);
  EXPECT_THROW(pearson_bit_correlation(a, std::vector<std::uint8_t>{1, 0}), ArgumentError);
}

TEST(Pearson, PackedAgreesWithOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(300);
    BitMatrix m(2, n);
    const double pa = rng.uniform01(), pb = rng.uniform01();
    for (std::size_t i = 0; i < n; ++i) {
      m.set(0, i, rng.uniform01() < pa);
      m.set(1, i, rng.uniform01() < (m.get(0, i) ? pb : 1 - pb));
    }
    const auto a = row_values(m, 0), b = row_values(m, 1);
    const double oracle = pearson_oracle(a, b);
    EXPECT_NEAR(pearson_bit_correlation(a, b), oracle, 1e-12);
    EXPECT_NEAR(pearson_bit_correlation(m.row(0), m.row(1), n), oracle, 1e-12);
  }
}

TEST(SelectCombined, LooseTauIsTopT) {
  const auto set = toy_set(40, 60, 6);
  const auto pool = pool_of(50);
  const auto bits = response_bits(pool, set);
  const auto scores = quality_scores(bits, set);
  const auto combined = select_combined(pool, bits, scores, 12, 1.01);
  const auto proposed = select_proposed(pool, scores, 12);
  EXPECT_EQ(combined.pool_indices, proposed.pool_indices);
  EXPECT_FALSE(combined.relaxed);
  EXPECT_THROW(select_combined(pool, bits, scores, 51, 0.2), ArgumentError);
}

TEST(SelectCombined, IdenticalRowsRejected) {
  const CandidatePool pool = pool_of(3);
  const auto bits = matrix_of({{1, 0, 1, 0, 1, 1}, {1, 0, 1, 0, 1, 1}, {0, 0, 1, 1, 0, 1}});
  const std::vector<std::uint32_t> scores{5, 4, 3};
  const auto sel = select_combined(pool, bits, scores, 2, 0.2);
  EXPECT_EQ(sel.pool_indices, (std::vector<std::size_t>{0, 2}));
  EXPECT_FALSE(sel.relaxed);
}

TEST(SelectCombined, MatchesGreedyOracle) {
  Rng rng(8);
  const CandidatePool pool = pool_of(40);
  for (int trial = 0; trial < 20; ++trial) {
    // Rows derived from a few sources so that correlations vary widely.
    std::vector<std::vector<int>> rows(40, std::vector<int>(64));
    std::vector<std::vector<int>> sources(5, std::vector<int>(64));
    for (auto& s : sources)
      for (auto& v : s) v = static_cast<int>(rng() & 1);
    for (auto& r : rows) {
      const auto& src = sources[rng.below(5)];
      const double noise = rng.uniform01() * 0.6;
      for (std::size_t i = 0; i < 64; ++i) r[i] = rng.uniform01() < noise ? !src[i] : src[i];
    }
    const auto bits = matrix_of(rows);
    std::vector<std::uint32_t> scores(40);
    for (auto& s : scores) s = static_cast<std::uint32_t>(rng.below(10));
    std::vector<std::size_t> ranking(40);
    std::iota(ranking.begin(), ranking.end(), std::size_t{0});
    std::stable_sort(ranking.begin(), ranking.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const auto sel = select_combined(pool, bits, scores, 8, 0.2);
    EXPECT_EQ(sel.pool_indices, greedy_oracle(ranking, bits, 8, 0.2));
    EXPECT_EQ(sel.pool_indices.size(), 8u);
    if (sel.relaxed) continue;
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < i; ++j)
        EXPECT_LT(std::abs(pearson_oracle(row_values(bits, sel.pool_indices[i]),
                                          row_values(bits, sel.pool_indices[j]))), 0.2);
  }
}

TEST(SelectCombined, RelaxesWhenFilterStarves) {
  const CandidatePool pool = pool_of(4);
  const auto bits = matrix_of({{1, 0, 1, 0}, {1, 1, 0, 0}, {0, 1, 1, 0}, {1, 0, 0, 1}});
  const std::vector<std::uint32_t> scores{1, 4, 3, 2};
  // tau = 0 rejects everything after the first pick.
  const auto sel = select_combined(pool, bits, scores, 3, 0.0);
  EXPECT_TRUE(sel.relaxed);
  EXPECT_EQ(sel.accepted_by_filter, 1u);
  EXPECT_EQ(sel.pool_indices, (std::vector<std::size_t>{1, 2, 3}));
}

TEST(SelectProposed, SortOracleAndTies) {
  const CandidatePool pool = pool_of(6);
  const std::vector<std::uint32_t> scores{3, 9, 3, 9, 1, 5};
  EXPECT_EQ(select_proposed(pool, scores, 6).pool_indices,
            (std::vector<std::size_t>{1, 3, 5, 0, 2, 4}));
  const std::vector<std::uint32_t> equal(6, 2);
  EXPECT_EQ(select_proposed(pool, equal, 3).pool_indices, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(SelectUnsupervised, RanksByBalance) {
  const CandidatePool pool = pool_of(4);
  const auto bits = matrix_of({{1, 1, 1, 1, 1, 1, 1, 1},
                               {1, 1, 1, 0, 0, 0, 0, 0},
                               {1, 0, 1, 0, 1, 0, 1, 0},
                               {0, 0, 0, 0, 0, 0, 0, 0}});
  const auto sel = select_unsupervised(pool, bits, 4, 1.01);
  EXPECT_EQ(sel.pool_indices, (std::vector<std::size_t>{2, 1, 0, 3}));
}

TEST(SelectUnsupervised, MatchesGreedyOracle) {
  Rng rng(10);
  const CandidatePool pool = pool_of(20);
  std::vector<std::vector<int>> rows(20, std::vector<int>(50));
  for (auto& r : rows) {
    const double p = rng.uniform01();
    for (auto& v : r) v = rng.uniform01() < p;
  }
  rows[7] = rows[3];
  const auto bits = matrix_of(rows);
  std::vector<std::size_t> ranking(20);
  std::iota(ranking.begin(), ranking.end(), std::size_t{0});
  const auto imbalance = [&](std::size_t r) {
    return std::abs(std::accumulate(rows[r].begin(), rows[r].end(), 0) / 50.0 - 0.5);
  };
  std::stable_sort(ranking.begin(), ranking.end(),
                   [&](std::size_t a, std::size_t b) { return imbalance(a) < imbalance(b); });
  EXPECT_EQ(select_unsupervised(pool, bits, 6, 0.2).pool_indices, greedy_oracle(ranking, bits, 6, 0.2));
}

TEST(SelectRandom, PermutationDeterminismAndUniformity) {
  const CandidatePool pool = pool_of(10);
  auto all = select_random(pool, 10, 3).pool_indices;
  EXPECT_EQ(all, select_random(pool, 10, 3).pool_indices);
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(all[i], i);

  // Each of 10 candidates chosen in a 3-subset with p = 0.3 over 10k draws.
  std::vector<int> hits(10, 0);
  for (std::uint64_t seed = 0; seed < 10000; ++seed)
    for (auto i : select_random(pool, 3, seed).pool_indices) ++hits[i];
  const double mean = 3000, sd = std::sqrt(10000 * 0.3 * 0.7);
  for (int h : hits) EXPECT_LT(std::abs(h - mean), 3 * sd);
}

TEST(Learn, StrategiesReturnTValidTriplets) {
  const auto set = toy_set(40, 80, 12);
  for (Strategy s : {Strategy::Random, Strategy::Unsupervised, Strategy::Proposed, Strategy::Combined}) {
    LearnOptions opts;
    opts.strategy = s;
    opts.candidates = 200;
    opts.bits = 32;
    const auto res = learn_arrangement(set, opts);
    EXPECT_EQ(res.arrangement.bits(), 32);
    EXPECT_EQ(res.scores.size(), 200u);
    for (const auto& t : res.arrangement.triplets()) EXPECT_NO_THROW(validate_triplet(t, 7, 48));
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  }
  EXPECT_THROW(parse_strategy("boosted"), ArgumentError);
}

TEST(Learn, ReportListsSelection) {
  const auto set = toy_set(20, 40, 13);
  LearnOptions opts;
  opts.candidates = 50;
  opts.bits = 8;
  const auto res = learn_arrangement(set, opts);
  std::ostringstream out;
  write_selection_report(out, res, opts, set);
  const std::string text = out.str();
  EXPECT_NE(text.find("strategy combined\n"), std::string::npos);
  EXPECT_NE(text.find("relaxed "), std::string::npos);
  std::istringstream lines(text);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line))
    if (!line.empty() && std::isdigit(static_cast<unsigned char>(line[0]))) ++rows;
  EXPECT_EQ(rows, 8);
}

}  // namespace
}  // namespace latch
