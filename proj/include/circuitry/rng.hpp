#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "circuitry/matrix.hpp"

namespace circuitry {

using RngEngine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent engine for stream `stream` of base seed `seed`. Trials and
/// benchmark repetitions each draw their own stream so that results do not
/// depend on scheduling or thread count.
inline RngEngine stream_rng(std::uint64_t seed, std::uint64_t stream) {
  return RngEngine(splitmix64(splitmix64(seed) ^ stream));
}

/// Unbiased draw from {0, ..., bound-1} via rejection.
inline std::uint64_t uniform_below(RngEngine& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

/// Uniform r-subset of {1, ..., n_total} by partial Fisher-Yates.
inline IndexSet random_subset(int n_total, int r, RngEngine& rng) {
  if (r < 0 || r > n_total)
    throw InputError("random_subset: need 0 <= r <= n_total");
  std::vector<int> pool(static_cast<std::size_t>(n_total));
  for (int i = 0; i < n_total; ++i) pool[static_cast<std::size_t>(i)] = i + 1;
  for (int i = 0; i < r; ++i) {
    const auto j = i + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n_total - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(r));
  return IndexSet(std::move(pool));
}

/// Uniform r-subset of an existing set.
inline IndexSet random_subset_of(const IndexSet& base, int r, RngEngine& rng) {
  IndexSet pos = random_subset(base.size(), r, rng);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(r));
  for (int p : pos) out.push_back(base[p - 1]);
  return IndexSet(std::move(out));
}

}  // namespace circuitry
