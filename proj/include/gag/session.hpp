#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gag {

using ItemId = std::int32_t;
using UserId = std::int32_t;

// One user's time-ordered interaction burst; the unit of arrival in the
// stream. Item ids are dense catalog indices and may repeat within a session.
struct Session {
  static constexpr int kUntagged = -1;

  UserId user_id = 0;
  std::vector<ItemId> items;
  std::size_t arrival_index = 0;  // position in the global stream
  int chunk_tag = kUntagged;      // 0 = train, 1..N = test chunk
  std::int64_t end_ts = 0;        // timestamp of the final event, seconds

  std::size_t length() const { return items.size(); }

  bool operator==(const Session&) const = default;
};

inline bool in_catalog(std::int32_t id, std::size_t catalog_size) {
  return id >= 0 && static_cast<std::size_t>(id) < catalog_size;
}

}  // namespace gag
