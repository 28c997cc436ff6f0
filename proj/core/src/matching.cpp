#include "latch/matching.hpp"

#include <bit>
#include <cstring>
#include <limits>
#include <ostream>

#include "latch/error.hpp"
#include "latch/parallel.hpp"

namespace latch {

std::uint32_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size())
    throw ArgumentError("hamming: descriptor lengths differ (" + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()) + " bytes)");
  std::uint32_t dist = 0;
  std::size_t i = 0;
  for (; i + 8 <= a.size(); i += 8) {
    std::uint64_t wa, wb;
    std::memcpy(&wa, a.data() + i, 8);
    std::memcpy(&wb, b.data() + i, 8);
    dist += static_cast<std::uint32_t>(std::popcount(wa ^ wb));
  }
  for (; i < a.size(); ++i)
    dist += static_cast<std::uint32_t>(std::popcount(static_cast<unsigned>(a[i] ^ b[i])));
  return dist;
}

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

struct Neighbors {
  std::uint32_t best = kNone, best_dist = kNone;
  std::uint32_t second = kNone, second_dist = kNone;
};

Neighbors two_nearest(const BinaryDescriptor& q, const std::vector<BinaryDescriptor>& set) {
  Neighbors n;
  for (std::uint32_t j = 0; j < set.size(); ++j) {
    const std::uint32_t d = hamming(q.bits, set[j].bits);
    if (d < n.best_dist) {
      n.second = n.best;
      n.second_dist = n.best_dist;
      n.best = j;
      n.best_dist = d;
    } else if (d < n.second_dist) {
      n.second = j;
      n.second_dist = d;
    }
  }
  return n;
}

}  // namespace

std::vector<Match> match_brute_force(const std::vector<BinaryDescriptor>& queries,
                                     const std::vector<BinaryDescriptor>& train,
                                     const MatchOptions& opts) {
  if (train.empty()) throw ArgumentError("match_brute_force: empty train set");
  if (opts.ratio && opts.mode != MatchMode::TwoNearest)
    throw ArgumentError("match_brute_force: the ratio test needs two-nearest mode");
  const std::size_t width = train.front().bits.size();
  for (const auto* set : {&queries, &train})
    for (const auto& d : *set)
      if (d.bits.size() != width)
        throw ArgumentError("match_brute_force: descriptors must share one length");

  std::vector<Neighbors> forward(queries.size());
  parallel_for(queries.size(), 64, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) forward[i] = two_nearest(queries[i], train);
  });
  std::vector<std::uint32_t> backward;
  if (opts.cross_check) {
    backward.resize(train.size(), kNone);
    parallel_for(train.size(), 64, [&](std::size_t begin, std::size_t end) {
      for (std::size_t j = begin; j < end; ++j)
        if (!queries.empty()) backward[j] = two_nearest(train[j], queries).best;
    });
  }

  const auto passes = [&](std::uint32_t i, std::uint32_t j, std::uint32_t d) {
    if (opts.max_distance && d > *opts.max_distance) return false;
    if (opts.cross_check && backward[j] != i) return false;
    return true;
  };

  std::vector<Match> out;
  for (std::uint32_t i = 0; i < queries.size(); ++i) {
    const Neighbors& n = forward[i];
    if (opts.ratio) {
      if (n.second == kNone) continue;
      bool ratio_ok = static_cast<double>(n.best_dist) < *opts.ratio * n.second_dist;
      // d2 = 0 forces d1 = 0: an exact duplicate survives only through cross-check.
      if (n.second_dist == 0) ratio_ok = opts.cross_check;
      if (ratio_ok && passes(i, n.best, n.best_dist)) out.push_back({i, n.best, n.best_dist});
      continue;
    }
    if (passes(i, n.best, n.best_dist)) out.push_back({i, n.best, n.best_dist});
    if (opts.mode == MatchMode::TwoNearest && n.second != kNone &&
        passes(i, n.second, n.second_dist))
      out.push_back({i, n.second, n.second_dist});
  }
  return out;
}

void write_matches_csv(std::ostream& out, const std::vector<Match>& matches) {
  out << "query_index,train_index,distance\n";
  for (const auto& m : matches)
    out << m.query_index << ',' << m.train_index << ',' << m.distance << '\n';
}

}  // namespace latch
