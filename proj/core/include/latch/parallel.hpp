#pragma once

#include <cstddef>
#include <functional>

namespace latch {

// Upper bound on worker threads used by the library. 0 means "hardware
// concurrency". Results never depend on this value.
void set_max_threads(unsigned n);
unsigned max_threads();

// Runs body(begin, end) over disjoint contiguous chunks of [0, count).
// Chunk boundaries depend only on count and grain, never on thread count.
void parallel_for(std::size_t count, std::size_t grain,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace latch
