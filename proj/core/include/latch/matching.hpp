#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "latch/descriptor.hpp"

namespace latch {

struct Match {
  std::uint32_t query_index = 0;
  std::uint32_t train_index = 0;
  std::uint32_t distance = 0;
  friend bool operator==(const Match&, const Match&) = default;
};

// Popcount of a XOR b. Throws ArgumentError on length mismatch.
std::uint32_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);
inline std::uint32_t hamming(const BinaryDescriptor& a, const BinaryDescriptor& b) {
  return hamming(a.bits, b.bits);
}

enum class MatchMode {
  Nearest,     // one match per query
  TwoNearest,  // nearest and second-nearest; with a ratio, only the nearest if it passes
};

struct MatchOptions {
  MatchMode mode = MatchMode::Nearest;
  std::optional<std::uint32_t> max_distance;
  // Keep the nearest match iff d1 < ratio * d2. Requires TwoNearest.
  std::optional<double> ratio;
  // Keep (i, j) iff query i is train j's nearest query.
  bool cross_check = false;
};

// Exhaustive matching; ties go to the lower index. Output sorted by query
// index (nearest before second-nearest).
std::vector<Match> match_brute_force(const std::vector<BinaryDescriptor>& queries,
                                     const std::vector<BinaryDescriptor>& train,
                                     const MatchOptions& opts = {});

// CSV with header `query_index,train_index,distance`.
void write_matches_csv(std::ostream& out, const std::vector<Match>& matches);

}  // namespace latch
