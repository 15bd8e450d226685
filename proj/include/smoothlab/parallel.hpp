#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace smoothlab {

/// Number of worker threads used by parallel loops. Affects speed only:
/// every parallel loop writes to per-index slots and reduces in index order.
void set_worker_count(unsigned count);
unsigned worker_count();

/// Runs body(i) for i in [0, count). The first exception (lowest index) is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Stable 64-bit mixing of a master seed with integer coordinates (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t seed, std::int64_t a, std::int64_t b = 0, std::int64_t c = 0);

}  // namespace smoothlab
