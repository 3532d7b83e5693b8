#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gag/baselines.hpp"
#include "gag/error.hpp"
#include "gag/ingest.hpp"
#include "gag/metrics.hpp"
#include "gag/model.hpp"
#include "gag/reservoir.hpp"
#include "gag/rng.hpp"
#include "gag/split.hpp"
#include "gag/trainer.hpp"
#include "gag/update_set.hpp"

namespace gag {

// Update-strategy arms: the full sampler, no updates at all, uniform
// sampling, forced cold-start inclusion with uniform sampling, and
// distance-weighted sampling without forced inclusion.
enum class Variant { full, static_model, ran_uni, fix_new, wass_uni };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::static_model: return "static";
    case Variant::ran_uni: return "ran-uni";
    case Variant::fix_new: return "fix-new";
    case Variant::wass_uni: return "wass-uni";
  }
  return "?";
}

inline Variant variant_from_string(const std::string& name) {
  if (name == "full") return Variant::full;
  if (name == "static") return Variant::static_model;
  if (name == "ran-uni" || name == "ran_uni") return Variant::ran_uni;
  if (name == "fix-new" || name == "fix_new") return Variant::fix_new;
  if (name == "wass-uni" || name == "wass_uni") return Variant::wass_uni;
  throw ConfigError("unknown variant: " + name);
}

inline SamplerPolicy variant_policy(Variant v, DistanceKind distance) {
  SamplerPolicy policy;
  policy.distance = distance;
  switch (v) {
    case Variant::full:
      policy.force_new_entities = true;
      policy.distance_weighted = true;
      break;
    case Variant::ran_uni:
      policy.force_new_entities = false;
      policy.distance_weighted = false;
      break;
    case Variant::fix_new:
      policy.force_new_entities = true;
      policy.distance_weighted = false;
      break;
    case Variant::wass_uni:
      policy.force_new_entities = false;
      policy.distance_weighted = true;
      break;
    case Variant::static_model:
      break;
  }
  return policy;
}

struct StreamOptions {
  ModelConfig model;
  std::size_t offline_epochs = 10;
  double offline_plateau_tol = 1e-3;  // early stop on training-loss plateau
  std::size_t online_epochs = 1;
  std::size_t reservoir_divisor = 100;  // capacity = train size / divisor
  std::size_t window_divisor = 2;       // window = chunk size / divisor
  DistanceKind distance = DistanceKind::wasserstein;
  Variant variant = Variant::full;
  std::vector<int> k_values = {5, 10, 20};
  double train_frac = 0.6;
  std::size_t num_chunks = 5;
  std::size_t workers = 1;

  void validate() const {
    model.validate();
    if (reservoir_divisor == 0 || window_divisor == 0) {
      throw ConfigError("reservoir/window divisors must be >= 1");
    }
    if (k_values.empty()) throw ConfigError("at least one K value required");
    for (int k : k_values) {
      if (k <= 0) throw ConfigError("K values must be positive");
    }
  }
};

struct StreamResult {
  std::vector<ChunkReport> reports;
  ModelParams model;   // state after the final chunk
  Reservoir reservoir; // state after the final chunk
  std::vector<std::uint64_t> model_fingerprints;  // one per chunk, post-update
  TrainStats offline;
  std::size_t final_num_items = 0;
  std::size_t final_num_users = 0;
};

namespace detail {

// Each phase draws from its own seeded stream, so runs stay reproducible
// even when one phase consumes a different amount of randomness (different
// variant, preloaded checkpoint, grown catalog).
constexpr std::uint64_t kOfflineSalt = 0x6f66666cULL;    // "offl"
constexpr std::uint64_t kReservoirSalt = 0x72657376ULL;  // "resv"
constexpr std::uint64_t kSampleSalt = 0x73616d70ULL;     // "samp"
constexpr std::uint64_t kUpdateSalt = 0x75706474ULL;     // "updt"

inline std::pair<std::size_t, std::size_t> entity_bounds(
    std::span<const Session> sessions) {
  std::size_t items = 0;
  std::size_t users = 0;
  for (const auto& s : sessions) {
    users = std::max(users, static_cast<std::size_t>(s.user_id) + 1);
    for (ItemId item : s.items) {
      items = std::max(items, static_cast<std::size_t>(item) + 1);
    }
  }
  return {items, users};
}

}  // namespace detail

// Full prequential protocol: offline training on the chronological prefix,
// then for each test chunk evaluate first, update after (grow the catalog
// for novel entities, assemble the update set, run online epochs, advance
// the reservoir). The static variant evaluates only.
inline StreamResult run_stream(const Corpus& corpus, const StreamOptions& opt,
                               std::optional<ModelParams> initial = {}) {
  opt.validate();
  const ChronologicalSplit split =
      chronological_split(corpus, opt.train_frac, opt.num_chunks);
  if (split.train.empty()) {
    throw DataError("run_stream: empty training split");
  }

  const auto [train_items, train_users] = detail::entity_bounds(split.train);
  const std::uint64_t seed = opt.model.rng_seed;
  Rng offline_rng(mix_seed(seed, detail::kOfflineSalt));
  Rng reservoir_rng(mix_seed(seed, detail::kReservoirSalt));

  StreamResult result;
  const bool preloaded = initial.has_value();
  if (preloaded) {
    result.model = std::move(*initial);
    grow_catalog(result.model,
                 std::max(train_items, result.model.num_items()),
                 std::max(train_users, result.model.num_users()));
  } else {
    result.model = init_model(opt.model, train_items, train_users);
    if (opt.offline_epochs > 0) {
      result.offline =
          train_minibatch(result.model, split.train, opt.offline_epochs,
                          offline_rng, opt.offline_plateau_tol);
    }
  }

  Reservoir reservoir = make_reservoir(
      std::max<std::size_t>(1, split.train.size() / opt.reservoir_divisor));
  advance(reservoir, split.train, reservoir_rng);

  for (std::size_t c = 0; c < split.chunks.size(); ++c) {
    const auto& chunk = split.chunks[c];
    const std::size_t known_items = result.model.num_items();
    const std::size_t known_users = result.model.num_users();
    const auto [chunk_items, chunk_users] = detail::entity_bounds(chunk);
    grow_catalog(result.model, std::max(known_items, chunk_items),
                 std::max(known_users, chunk_users));

    result.reports.push_back(evaluate_chunk(result.model, chunk, opt.k_values,
                                            static_cast<int>(c + 1),
                                            opt.workers));

    if (opt.variant != Variant::static_model) {
      const std::size_t window =
          std::max<std::size_t>(1, chunk.size() / opt.window_divisor);
      Rng sample_rng(mix_seed(mix_seed(seed, detail::kSampleSalt), c));
      Rng update_rng(mix_seed(mix_seed(seed, detail::kUpdateSalt), c));
      const UpdateSet update_set = build_update_set(
          reservoir, chunk, result.model, window, known_items, known_users,
          sample_rng, variant_policy(opt.variant, opt.distance));
      online_update(result.model, update_set, opt.online_epochs, update_rng);
      advance(reservoir, chunk, reservoir_rng);
    }
    result.model_fingerprints.push_back(params_fingerprint(result.model));
  }

  result.reservoir = std::move(reservoir);
  result.final_num_items = result.model.num_items();
  result.final_num_users = result.model.num_users();
  return result;
}

enum class BaselineKind { pop, spop };

inline BaselineKind baseline_from_string(const std::string& name) {
  if (name == "pop") return BaselineKind::pop;
  if (name == "spop" || name == "s-pop") return BaselineKind::spop;
  throw ConfigError("unknown baseline: " + name);
}

// Popularity recommender seeded on the training split; S-POP additionally
// uses within-prefix frequencies at prediction time.
inline PopModel baseline_pop(std::span<const Session> history,
                             std::size_t num_items) {
  PopModel pop(num_items);
  pop.observe_sessions(history);
  return pop;
}

// Runs POP or S-POP through the same prequential protocol. When
// pop_online_updates is set, counts absorb each chunk after it is evaluated.
inline StreamResult run_baseline_stream(const Corpus& corpus,
                                        const StreamOptions& opt,
                                        BaselineKind kind,
                                        bool pop_online_updates = false) {
  opt.validate();
  const ChronologicalSplit split =
      chronological_split(corpus, opt.train_frac, opt.num_chunks);
  const auto [train_items, train_users] = detail::entity_bounds(split.train);

  StreamResult result;
  PopModel pop = baseline_pop(split.train, std::max<std::size_t>(1, train_items));
  for (std::size_t c = 0; c < split.chunks.size(); ++c) {
    const auto& chunk = split.chunks[c];
    const auto [chunk_items, chunk_users] = detail::entity_bounds(chunk);
    if (chunk_items > pop.num_items()) pop.grow(chunk_items);

    auto rank_fn = [&pop, kind](const Session& session, std::size_t pos) {
      const ItemId target = session.items[pos];
      if (kind == BaselineKind::pop) return pop.rank_of(target);
      return spop_rank(std::span<const ItemId>(session.items.data(), pos),
                       target, pop);
    };
    result.reports.push_back(evaluate_chunk_with(chunk, opt.k_values,
                                                 static_cast<int>(c + 1),
                                                 rank_fn, opt.workers));
    if (pop_online_updates) pop.observe_sessions(chunk);
  }
  result.final_num_items = pop.num_items();
  result.final_num_users = train_users;
  return result;
}

}  // namespace gag
