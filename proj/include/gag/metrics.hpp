#pragma once

#include <chrono>
#include <functional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "gag/error.hpp"
#include "gag/forward.hpp"
#include "gag/model.hpp"
#include "gag/session.hpp"
#include "gag/session_graph.hpp"

namespace gag {

// Per-chunk evaluation summary. recall/mrr are aligned with k_values.
struct ChunkReport {
  int chunk_index = 0;
  std::size_t session_count = 0;
  std::size_t event_count = 0;
  std::vector<int> k_values;
  std::vector<double> recall;
  std::vector<double> mrr;
  double wall_time_seconds = 0.0;
};

// 1-based rank of the target under descending score, ties broken by
// ascending item id.
inline std::size_t rank_of_target(std::span<const double> scores,
                                  ItemId target) {
  if (!in_catalog(target, scores.size())) {
    throw CatalogError("rank_of_target: target outside catalog");
  }
  const double target_score = scores[target];
  std::size_t rank = 1;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (scores[j] > target_score ||
        (scores[j] == target_score && static_cast<ItemId>(j) < target)) {
      ++rank;
    }
  }
  return rank;
}

// Generic prequential chunk evaluation: rank_fn(session, prefix_length) must
// return the 1-based rank of session.items[prefix_length]. Every prefix of
// length >= 1 is one prediction event. Sessions are scored independently and
// reduced in session order, so the worker count never changes the result.
inline ChunkReport evaluate_chunk_with(
    std::span<const Session> chunk, std::span<const int> k_values,
    int chunk_index,
    const std::function<std::size_t(const Session&, std::size_t)>& rank_fn,
    std::size_t workers = 1) {
  if (chunk.empty()) throw DataError("evaluate_chunk: empty chunk");
  if (k_values.empty()) throw ConfigError("evaluate_chunk: no K values");

  const auto started = std::chrono::steady_clock::now();
  struct Partial {
    std::size_t events = 0;
    std::vector<double> hits;
    std::vector<double> rr;
  };
  std::vector<Partial> partials(chunk.size());

  auto score_session = [&](std::size_t si) {
    const Session& session = chunk[si];
    Partial p;
    p.hits.assign(k_values.size(), 0.0);
    p.rr.assign(k_values.size(), 0.0);
    for (std::size_t pos = 1; pos < session.items.size(); ++pos) {
      const std::size_t rank = rank_fn(session, pos);
      ++p.events;
      for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
        if (rank <= static_cast<std::size_t>(k_values[ki])) {
          p.hits[ki] += 1.0;
          p.rr[ki] += 1.0 / static_cast<double>(rank);
        }
      }
    }
    partials[si] = std::move(p);
  };

  if (workers <= 1 || chunk.size() < 2) {
    for (std::size_t si = 0; si < chunk.size(); ++si) score_session(si);
  } else {
    const std::size_t thread_count = std::min(workers, chunk.size());
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (std::size_t w = 0; w < thread_count; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t si = w; si < chunk.size(); si += thread_count) {
          score_session(si);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  ChunkReport report;
  report.chunk_index = chunk_index;
  report.session_count = chunk.size();
  report.k_values.assign(k_values.begin(), k_values.end());
  report.recall.assign(k_values.size(), 0.0);
  report.mrr.assign(k_values.size(), 0.0);
  for (const auto& p : partials) {
    report.event_count += p.events;
    for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
      report.recall[ki] += p.hits[ki];
      report.mrr[ki] += p.rr[ki];
    }
  }
  if (report.event_count == 0) {
    throw DataError("evaluate_chunk: chunk produced no prediction events");
  }
  for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
    report.recall[ki] /= static_cast<double>(report.event_count);
    report.mrr[ki] /= static_cast<double>(report.event_count);
  }
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return report;
}

// Model-based evaluation: each prefix is converted to a session graph and
// scored with a forward pass. The model catalog must already cover every
// entity in the chunk.
inline ChunkReport evaluate_chunk(const ModelParams& model,
                                  std::span<const Session> chunk,
                                  std::span<const int> k_values,
                                  int chunk_index, std::size_t workers = 1) {
  auto rank_fn = [&model](const Session& session, std::size_t pos) {
    const SessionGraph graph = build_session_graph(
        session.user_id, std::span<const ItemId>(session.items.data(), pos),
        model.num_items());
    const ForwardResult fwd = forward(graph, model);
    return rank_of_target(fwd.pred.probs, session.items[pos]);
  };
  return evaluate_chunk_with(chunk, k_values, chunk_index, rank_fn, workers);
}

}  // namespace gag
