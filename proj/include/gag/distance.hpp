#pragma once

#include <cmath>
#include <string>

#include "gag/error.hpp"
#include "gag/forward.hpp"
#include "gag/session.hpp"

namespace gag {

enum class DistanceKind { wasserstein, kl, total_variation };

inline const char* to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::wasserstein: return "wasserstein";
    case DistanceKind::kl: return "kl";
    case DistanceKind::total_variation: return "tv";
  }
  return "?";
}

inline DistanceKind distance_kind_from_string(const std::string& name) {
  if (name == "wasserstein" || name == "emd") return DistanceKind::wasserstein;
  if (name == "kl") return DistanceKind::kl;
  if (name == "tv" || name == "total_variation") {
    return DistanceKind::total_variation;
  }
  throw ConfigError("unknown distance kind: " + name);
}

// Distance between the one-hot distribution at `target` and the predicted
// distribution. All three kinds are non-negative and zero when the
// prediction is exactly one-hot at the target.
//
//   kl           -log p[target], floored at kProbFloor
//   tv           max(1 - p[target], max over other items of p[j])
//   wasserstein  1-D earth mover's distance with item indices as positions
//                on the integer line, i.e. the L1 difference of CDFs
inline double distribution_distance(DistanceKind kind, ItemId target,
                                    const PredictionDistribution& pred) {
  const auto& p = pred.probs;
  const std::size_t m = p.size();
  if (!in_catalog(target, m)) {
    throw CatalogError("distance target " + std::to_string(target) +
                       " outside catalog of size " + std::to_string(m));
  }
  double total = 0.0;
  for (double v : p) {
    if (v < 0.0) throw ContractError("distribution_distance: negative mass");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw ContractError("distribution_distance: prediction not normalized");
  }

  switch (kind) {
    case DistanceKind::kl:
      return -std::log(std::max(p[target], kProbFloor));
    case DistanceKind::total_variation: {
      double largest_other = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        if (static_cast<ItemId>(j) != target) {
          largest_other = std::max(largest_other, p[j]);
        }
      }
      return std::max(1.0 - p[target], largest_other);
    }
    case DistanceKind::wasserstein: {
      // Sum of |CDF difference| between consecutive integer positions; the
      // final position is skipped because both CDFs reach 1 there.
      double cdf_pred = 0.0;
      double cdf_target = 0.0;
      double emd = 0.0;
      for (std::size_t k = 0; k + 1 < m; ++k) {
        cdf_pred += p[k];
        if (static_cast<ItemId>(k) == target) cdf_target = 1.0;
        emd += std::abs(cdf_target - cdf_pred);
      }
      return emd;
    }
  }
  throw ContractError("distribution_distance: unhandled kind");
}

}  // namespace gag
