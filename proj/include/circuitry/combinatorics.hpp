#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "circuitry/matrix.hpp"

namespace circuitry {

inline double log_binomial(int n, int k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double v = 1.0;
  for (int j = 1; j <= k; ++j) v *= static_cast<double>(n - k + j) / static_cast<double>(j);
  return v;
}

/// Probability that a uniform r-subset of {1..n_total} contains a fixed
/// n-subset. Equals C(n_total-n, r-n) / C(n_total, r), computed as the
/// telescoping product prod_{j=0}^{n-1} (r-j)/(n_total-j).
inline double subset_containment_probability(int n_total, int r, int n) {
  if (n < 0 || r < 0 || r > n_total) throw InputError("subset_containment_probability: bad sizes");
  if (n > r) return 0.0;
  double p = 1.0;
  for (int j = 0; j < n; ++j)
    p *= static_cast<double>(r - j) / static_cast<double>(n_total - j);
  return p;
}

/// Advance `comb` (a sorted k-subset of {1..limit}) to its lexicographic
/// successor in place. Returns false once the last combination is passed.
inline bool next_combination_inplace(std::vector<int>& comb, int limit) {
  const int k = static_cast<int>(comb.size());
  if (k == 0) return false;
  int i = k - 1;
  while (i >= 0 && comb[static_cast<std::size_t>(i)] == limit - (k - 1 - i)) --i;
  if (i < 0) return false;
  ++comb[static_cast<std::size_t>(i)];
  for (int j = i + 1; j < k; ++j)
    comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
  return true;
}

/// Lexicographic successor of a subset, or nullopt when exhausted.
inline std::optional<IndexSet> next_combination(const IndexSet& comb, int limit) {
  if (comb.empty() || comb[comb.size() - 1] > limit)
    throw InputError("next_combination: subset not within 1..limit");
  std::vector<int> v = comb.values();
  if (!next_combination_inplace(v, limit)) return std::nullopt;
  return IndexSet(std::move(v));
}

}  // namespace circuitry
