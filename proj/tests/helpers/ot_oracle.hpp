#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace gag_test {

// Exact earth mover's distance between two rational distributions given as
// integer masses over positions 0..n-1 with a shared denominator `total`.
// Every unit of mass becomes one quantum and the optimal transport is solved
// as a min-cost perfect matching by exhaustive bitmask DP -- brute force,
// independent of any CDF identity. Feasible up to ~14 quanta per side.
inline double emd_bruteforce_rational(const std::vector<int>& mass_a,
                                      const std::vector<int>& mass_b,
                                      int total) {
  std::vector<int> pos_a, pos_b;
  for (std::size_t i = 0; i < mass_a.size(); ++i) {
    for (int q = 0; q < mass_a[i]; ++q) pos_a.push_back(static_cast<int>(i));
  }
  for (std::size_t i = 0; i < mass_b.size(); ++i) {
    for (int q = 0; q < mass_b[i]; ++q) pos_b.push_back(static_cast<int>(i));
  }
  const std::size_t n = pos_a.size();
  if (pos_b.size() != n || static_cast<int>(n) != total || total <= 0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const std::size_t full = (std::size_t{1} << n) - 1;
  std::vector<double> dp(full + 1, std::numeric_limits<double>::infinity());
  dp[0] = 0.0;
  for (std::size_t mask = 1; mask <= full; ++mask) {
    const int k = std::popcount(mask) - 1;  // quantum of a being matched
    for (std::size_t j = 0; j < n; ++j) {
      if ((mask >> j) & 1u) {
        const double candidate =
            dp[mask ^ (std::size_t{1} << j)] +
            std::abs(pos_a[static_cast<std::size_t>(k)] - pos_b[j]);
        if (candidate < dp[mask]) dp[mask] = candidate;
      }
    }
  }
  return dp[full] / static_cast<double>(total);
}

// Second independent check for arbitrary real masses: builds the monotone
// coupling explicitly (walk both distributions left to right, moving
// min(remaining supply, remaining demand) each step) and sums its cost.
inline double emd_monotone_coupling(const std::vector<double>& a,
                                    const std::vector<double>& b) {
  const std::size_t n = a.size();
  std::size_t i = 0, j = 0;
  double rem_a = n > 0 ? a[0] : 0.0;
  double rem_b = n > 0 ? b[0] : 0.0;
  double cost = 0.0;
  while (i < n && j < n) {
    const double moved = std::min(rem_a, rem_b);
    cost += moved * std::abs(static_cast<double>(i) - static_cast<double>(j));
    rem_a -= moved;
    rem_b -= moved;
    if (rem_a <= 1e-15) {
      ++i;
      if (i < n) rem_a = a[i];
    }
    if (rem_b <= 1e-15) {
      ++j;
      if (j < n) rem_b = b[j];
    }
  }
  return cost;
}

}  // namespace gag_test
