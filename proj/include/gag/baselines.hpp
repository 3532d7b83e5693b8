#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <unordered_map>
#include <vector>

#include "gag/error.hpp"
#include "gag/session.hpp"

namespace gag {

// Popularity recommender: ranks the catalog by global interaction count,
// ties broken by ascending item id. Counts can keep growing during a stream.
class PopModel {
 public:
  explicit PopModel(std::size_t num_items) : counts_(num_items, 0) {
    if (num_items == 0) throw ConfigError("PopModel: empty catalog");
  }

  void grow(std::size_t num_items) {
    if (num_items < counts_.size()) {
      throw ConfigError("PopModel: catalog cannot shrink");
    }
    counts_.resize(num_items, 0);
  }

  void observe(ItemId item) {
    if (!in_catalog(item, counts_.size())) {
      throw CatalogError("PopModel: item outside catalog");
    }
    ++counts_[item];
  }

  void observe_sessions(std::span<const Session> sessions) {
    for (const auto& s : sessions) {
      for (ItemId item : s.items) observe(item);
    }
  }

  std::size_t num_items() const { return counts_.size(); }
  const std::vector<std::int64_t>& counts() const { return counts_; }

  // true when a ranks strictly before b
  bool before(ItemId a, ItemId b) const {
    if (counts_[a] != counts_[b]) return counts_[a] > counts_[b];
    return a < b;
  }

  std::size_t rank_of(ItemId target) const {
    if (!in_catalog(target, counts_.size())) {
      throw CatalogError("PopModel: target outside catalog");
    }
    std::size_t rank = 1;
    for (std::size_t j = 0; j < counts_.size(); ++j) {
      if (static_cast<ItemId>(j) != target &&
          before(static_cast<ItemId>(j), target)) {
        ++rank;
      }
    }
    return rank;
  }

  std::vector<ItemId> topk(std::size_t k) const {
    if (k == 0 || k > counts_.size()) {
      throw ConfigError("PopModel: K must be in [1, catalog size]");
    }
    std::vector<ItemId> order(counts_.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [this](ItemId a, ItemId b) { return before(a, b); });
    order.resize(k);
    return order;
  }

 private:
  std::vector<std::int64_t> counts_;
};

// S-POP: items already seen in the current session prefix rank first, by
// within-prefix frequency; ties among them and the remaining catalog tail
// follow the popularity order. An empty prefix degrades to plain POP.
inline std::size_t spop_rank(std::span<const ItemId> prefix, ItemId target,
                             const PopModel& pop) {
  if (!in_catalog(target, pop.num_items())) {
    throw CatalogError("spop_rank: target outside catalog");
  }
  std::unordered_map<ItemId, std::int64_t> in_session;
  for (ItemId item : prefix) ++in_session[item];

  const auto target_it = in_session.find(target);
  if (target_it != in_session.end()) {
    const std::int64_t target_count = target_it->second;
    std::size_t rank = 1;
    for (const auto& [item, count] : in_session) {
      if (item == target) continue;
      if (count > target_count ||
          (count == target_count && pop.before(item, target))) {
        ++rank;
      }
    }
    return rank;
  }

  std::size_t rank = in_session.size() + 1;
  for (std::size_t j = 0; j < pop.num_items(); ++j) {
    const ItemId item = static_cast<ItemId>(j);
    if (item == target || in_session.contains(item)) continue;
    if (pop.before(item, target)) ++rank;
  }
  return rank;
}

inline std::vector<ItemId> spop_topk(std::span<const ItemId> prefix,
                                     std::size_t k, const PopModel& pop) {
  if (k == 0 || k > pop.num_items()) {
    throw ConfigError("spop_topk: K must be in [1, catalog size]");
  }
  std::unordered_map<ItemId, std::int64_t> in_session;
  for (ItemId item : prefix) ++in_session[item];

  std::vector<ItemId> order(pop.num_items());
  std::iota(order.begin(), order.end(), 0);
  auto count_of = [&](ItemId item) {
    const auto it = in_session.find(item);
    return it == in_session.end() ? std::int64_t{0} : it->second;
  };
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](ItemId a, ItemId b) {
                      const std::int64_t ca = count_of(a);
                      const std::int64_t cb = count_of(b);
                      if (ca != cb) return ca > cb;
                      return pop.before(a, b);
                    });
  order.resize(k);
  return order;
}

}  // namespace gag
