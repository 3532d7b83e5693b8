#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <unordered_set>
#include <vector>

#include "gag/distance.hpp"
#include "gag/error.hpp"
#include "gag/forward.hpp"
#include "gag/model.hpp"
#include "gag/reservoir.hpp"
#include "gag/rng.hpp"
#include "gag/session.hpp"
#include "gag/session_graph.hpp"
#include "gag/trainer.hpp"

namespace gag {

// Sessions selected for one online-training round.
struct UpdateSet {
  std::vector<Session> sessions;
  std::size_t forced_count = 0;  // included via the new-item/new-user rule
  std::size_t window_size = 0;   // the sampling budget
};

// Knobs for the ablation variants: the full sampler forces cold-start
// sessions in and weights the rest by distribution distance; switching
// either off yields the uniform / no-forcing arms.
struct SamplerPolicy {
  bool force_new_entities = true;
  bool distance_weighted = true;
  DistanceKind distance = DistanceKind::wasserstein;
};

// Weighted draw without replacement: each pick takes index i with probability
// weight_i over the remaining total, then drops it. Once the remaining total
// is zero (all-zero pool or exhausted tail) the draw falls back to uniform.
inline std::vector<std::size_t> weighted_sample_without_replacement(
    std::vector<double> weights, std::size_t count, Rng& rng) {
  for (double w : weights) {
    if (!(w >= 0.0)) {
      throw ContractError("sampling weights must be finite and >= 0");
    }
  }
  std::vector<std::size_t> alive(weights.size());
  std::iota(alive.begin(), alive.end(), 0);
  count = std::min(count, weights.size());

  std::vector<std::size_t> picked;
  picked.reserve(count);
  while (picked.size() < count) {
    double total = 0.0;
    for (std::size_t idx : alive) total += weights[idx];
    std::size_t chosen_pos = 0;
    if (total > 0.0) {
      const double r = rng.next_double() * total;
      double acc = 0.0;
      chosen_pos = alive.size() - 1;
      for (std::size_t pos = 0; pos < alive.size(); ++pos) {
        acc += weights[alive[pos]];
        if (r < acc) {
          chosen_pos = pos;
          break;
        }
      }
    } else {
      chosen_pos = rng.next_index(alive.size());
    }
    picked.push_back(alive[chosen_pos]);
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(chosen_pos));
  }
  return picked;
}

// Informativeness of one stored session: score its final item from the items
// before it (one forward pass) and measure the distance between the
// prediction and the one-hot truth.
inline double session_distance(const ModelParams& model, const Session& session,
                               DistanceKind kind) {
  if (session.items.empty()) {
    throw ContractError("session_distance: empty session");
  }
  std::span<const ItemId> prefix(session.items);
  if (session.items.size() >= 2) prefix = prefix.first(prefix.size() - 1);
  const ItemId target = session.items.back();
  const SessionGraph graph =
      build_session_graph(session.user_id, prefix, model.num_items());
  const ForwardResult fwd = forward(graph, model);
  return distribution_distance(kind, target, fwd.pred);
}

// Assembles the online-training set: (1) every new session carrying an item
// or user unknown before this batch is included unconditionally (and may
// overflow the window); (2) remaining slots are drawn without replacement
// from reservoir + new sessions, weighted by distribution distance under the
// full policy or uniformly otherwise.
inline UpdateSet build_update_set(const Reservoir& reservoir,
                                  std::span<const Session> new_sessions,
                                  const ModelParams& model,
                                  std::size_t window_size,
                                  std::size_t known_items,
                                  std::size_t known_users, Rng& rng,
                                  const SamplerPolicy& policy = {}) {
  if (window_size == 0) throw ConfigError("window_size must be >= 1");

  UpdateSet out;
  out.window_size = window_size;

  std::unordered_set<std::size_t> taken;
  if (policy.force_new_entities) {
    for (const auto& session : new_sessions) {
      bool novel = !in_catalog(session.user_id, known_users);
      for (ItemId item : session.items) {
        if (novel) break;
        novel = !in_catalog(item, known_items);
      }
      if (novel && taken.insert(session.arrival_index).second) {
        out.sessions.push_back(session);
      }
    }
  }
  out.forced_count = out.sessions.size();
  if (out.forced_count >= window_size) return out;

  std::vector<const Session*> pool;
  pool.reserve(reservoir.entries.size() + new_sessions.size());
  for (const auto& session : reservoir.entries) {
    if (!taken.contains(session.arrival_index)) pool.push_back(&session);
  }
  for (const auto& session : new_sessions) {
    if (!taken.contains(session.arrival_index)) pool.push_back(&session);
  }
  if (pool.empty()) return out;

  std::vector<double> weights(pool.size(), 1.0);
  if (policy.distance_weighted) {
    for (std::size_t i = 0; i < pool.size(); ++i) {
      weights[i] = session_distance(model, *pool[i], policy.distance);
    }
  }
  const std::vector<std::size_t> picked = weighted_sample_without_replacement(
      std::move(weights), window_size - out.forced_count, rng);
  for (std::size_t idx : picked) {
    out.sessions.push_back(*pool[idx]);
  }
  return out;
}

enum class UpdateStatus { updated, skipped_empty };

// Online training round over the update set; an empty set is a warned no-op.
inline UpdateStatus online_update(ModelParams& params, const UpdateSet& set,
                                  std::size_t online_epochs, Rng& rng) {
  if (set.sessions.empty()) return UpdateStatus::skipped_empty;
  train_minibatch(params, set.sessions, online_epochs, rng);
  return UpdateStatus::updated;
}

}  // namespace gag
