#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "gag/error.hpp"
#include "gag/ingest.hpp"
#include "gag/rng.hpp"
#include "gag/session.hpp"

namespace gag {

// Desk-scale synthetic event stream with controllable preference drift and
// cold-start items. Each user walks a private cycle over a small taste set;
// at the drift point a configurable share of users re-draws their taste set,
// and a fixed share of post-split sessions gets one brand-new catalog item
// injected. Session spacing is chosen so that re-ingesting the log with the
// same gap reproduces the sessions exactly.
struct SynthOptions {
  std::size_t num_users = 50;
  std::size_t num_items = 200;
  std::size_t num_sessions = 1200;
  double drift_at = 0.6;     // stream fraction where drifting users re-draw
  double drift_share = 0.5;  // share of users whose taste re-draws
  double novel_rate = 0.05;  // share of post-split sessions given a new item
  double train_frac = 0.6;   // boundary used for novel-item placement
  std::size_t taste_size = 8;
  double noise = 0.1;  // chance a step jumps to a uniform catalog item
  // sessions shorter than the taste cycle keep next-item prediction tied to
  // the (driftable) preference instead of the visible session structure
  std::size_t min_session_len = 3;
  std::size_t max_session_len = 6;
  std::int64_t gap_seconds = 8 * 3600;
  std::uint64_t seed = 1;

  void validate() const {
    if (num_users == 0 || num_items == 0 || num_sessions == 0) {
      throw ConfigError("synth: users, items and sessions must be >= 1");
    }
    if (taste_size == 0 || taste_size > num_items) {
      throw ConfigError("synth: taste_size must be in [1, num_items]");
    }
    if (min_session_len < 2 || max_session_len > 20 ||
        min_session_len > max_session_len) {
      throw ConfigError("synth: session length range must satisfy "
                        "2 <= min <= max <= 20");
    }
    if (drift_at < 0.0 || drift_at > 1.0 || drift_share < 0.0 ||
        drift_share > 1.0 || novel_rate < 0.0 || novel_rate > 1.0 ||
        train_frac <= 0.0 || train_frac >= 1.0) {
      throw ConfigError("synth: fractions must lie in [0, 1]");
    }
    if (gap_seconds <= 0) throw ConfigError("synth: gap must be positive");
    if (noise < 0.0 || noise > 1.0) {
      throw ConfigError("synth: noise must lie in [0, 1]");
    }
  }
};

namespace detail {

// A taste set is a contiguous block of catalog indices visited in a private
// shuffled cycle. Blocks act like genres: a partially learned model puts its
// mass near the right region, so prediction distances shrink as a user's
// current block is learned.
inline std::vector<ItemId> sample_taste(std::size_t taste_size,
                                        std::size_t num_items, Rng& rng) {
  const std::size_t start =
      taste_size >= num_items ? 0 : rng.next_index(num_items - taste_size + 1);
  std::vector<ItemId> taste(taste_size);
  std::iota(taste.begin(), taste.end(), static_cast<ItemId>(start));
  rng.shuffle(taste);
  return taste;
}

}  // namespace detail

inline std::vector<EventRecord> generate_synth_log(const SynthOptions& opt) {
  opt.validate();
  Rng rng(opt.seed);

  std::vector<std::vector<ItemId>> taste_pre(opt.num_users);
  std::vector<std::vector<ItemId>> taste_post(opt.num_users);
  for (std::size_t u = 0; u < opt.num_users; ++u) {
    taste_pre[u] = detail::sample_taste(opt.taste_size, opt.num_items, rng);
    const bool drifts = rng.next_double() < opt.drift_share;
    taste_post[u] =
        drifts ? detail::sample_taste(opt.taste_size, opt.num_items, rng)
               : taste_pre[u];
  }

  const std::size_t drift_index = static_cast<std::size_t>(
      std::floor(opt.drift_at * static_cast<double>(opt.num_sessions)));
  const std::size_t split_index = static_cast<std::size_t>(
      std::floor(opt.train_frac * static_cast<double>(opt.num_sessions)));

  struct Generated {
    std::size_t user;
    std::vector<ItemId> items;
  };
  std::vector<Generated> sessions;
  sessions.reserve(opt.num_sessions);

  // Items emitted before the split boundary. Post-split draws are clamped to
  // this set so the injected novel pool is exactly the set of items the
  // training portion has never seen.
  std::vector<bool> seen(opt.num_items, false);
  std::vector<ItemId> seen_items;
  bool clamped = false;
  auto clamp_tastes = [&]() {
    if (seen_items.empty()) return;
    for (auto table : {&taste_pre, &taste_post}) {
      for (auto& taste : *table) {
        for (ItemId& item : taste) {
          if (!seen[item]) item = seen_items[rng.next_index(seen_items.size())];
        }
      }
    }
    clamped = true;
  };

  for (std::size_t k = 0; k < opt.num_sessions; ++k) {
    if (k == split_index && !clamped) clamp_tastes();
    const bool post_split = clamped && k >= split_index;
    const std::size_t user = rng.next_index(opt.num_users);
    const auto& taste = (k < drift_index) ? taste_pre[user] : taste_post[user];
    const std::size_t len =
        opt.min_session_len +
        rng.next_index(opt.max_session_len - opt.min_session_len + 1);
    std::vector<ItemId> items;
    items.reserve(len);
    std::size_t pos = rng.next_index(taste.size());
    ItemId current = taste[pos];
    items.push_back(current);
    for (std::size_t step = 1; step < len; ++step) {
      if (rng.next_double() < opt.noise) {
        current = post_split
                      ? seen_items[rng.next_index(seen_items.size())]
                      : static_cast<ItemId>(rng.next_index(opt.num_items));
      } else {
        const auto it = std::find(taste.begin(), taste.end(), current);
        if (it == taste.end()) {
          current = taste[rng.next_index(taste.size())];
        } else {
          const std::size_t at =
              static_cast<std::size_t>(it - taste.begin());
          current = taste[(at + 1) % taste.size()];
        }
      }
      items.push_back(current);
    }
    if (!post_split) {
      for (ItemId item : items) {
        if (!seen[item]) {
          seen[item] = true;
          seen_items.push_back(item);
        }
      }
    }
    sessions.push_back({user, std::move(items)});
  }

  // novel-item injection: an exact share of post-split sessions gets an item
  // the training portion has never seen. Each novel item is planted in a
  // pair of sessions from the same user (its debut and a later recurrence),
  // so cold-start entities behave like real adoptions rather than one-off
  // noise.
  const std::size_t post_count = opt.num_sessions - split_index;
  const std::size_t inject_count = static_cast<std::size_t>(
      std::llround(opt.novel_rate * static_cast<double>(post_count)));
  std::vector<std::vector<std::size_t>> per_user(opt.num_users);
  for (std::size_t k = split_index; k < opt.num_sessions; ++k) {
    per_user[sessions[k].user].push_back(k);
  }
  std::vector<std::size_t> user_order(opt.num_users);
  std::iota(user_order.begin(), user_order.end(), 0);
  rng.shuffle(user_order);

  std::vector<std::size_t> chosen;
  for (std::size_t u : user_order) {
    const auto& list = per_user[u];
    for (std::size_t i = 0; i + 1 < list.size() &&
                            chosen.size() + 2 <= inject_count;
         i += 2) {
      chosen.push_back(list[i]);
      chosen.push_back(list[i + 1]);
    }
    if (chosen.size() + 2 > inject_count) break;
  }
  for (std::size_t u : user_order) {  // odd remainder: a single debut
    if (chosen.size() >= inject_count) break;
    for (std::size_t k : per_user[u]) {
      if (std::find(chosen.begin(), chosen.end(), k) == chosen.end()) {
        chosen.push_back(k);
        break;
      }
    }
  }
  ItemId next_novel = static_cast<ItemId>(opt.num_items);
  for (std::size_t i = 0; i < chosen.size(); i += 2) {
    const ItemId novel = next_novel++;
    auto& debut = sessions[chosen[i]].items;
    debut[debut.size() / 2] = novel;
    if (i + 1 < chosen.size()) {
      auto& recurrence = sessions[chosen[i + 1]].items;
      recurrence[recurrence.size() / 2] = novel;
    }
  }

  // flatten with timestamps: sessions never overlap and inter-session gaps
  // always exceed the segmentation gap
  const std::int64_t session_stride = 2 * opt.gap_seconds + 3600;
  std::vector<EventRecord> records;
  for (std::size_t k = 0; k < sessions.size(); ++k) {
    const auto& s = sessions[k];
    const std::int64_t start = static_cast<std::int64_t>(k) * session_stride;
    for (std::size_t j = 0; j < s.items.size(); ++j) {
      records.push_back({"u" + std::to_string(s.user),
                         "i" + std::to_string(s.items[j]),
                         start + static_cast<std::int64_t>(j) * 60});
    }
  }
  return records;
}

// Tab-separated event log with a header line.
inline void write_event_log(std::span<const EventRecord> records,
                            const std::string& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for write");
  out << "user\titem\ttimestamp\n";
  for (const auto& rec : records) {
    out << rec.user << '\t' << rec.item << '\t' << rec.timestamp << '\n';
  }
}

}  // namespace gag
