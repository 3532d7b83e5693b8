#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "gag/adam.hpp"
#include "gag/backward.hpp"
#include "gag/forward.hpp"
#include "gag/model.hpp"
#include "gag/rng.hpp"
#include "gag/session.hpp"
#include "gag/session_graph.hpp"

namespace gag {

// One next-item prediction instance: the session prefix and its successor.
struct PredictionEvent {
  UserId user = 0;
  std::span<const ItemId> prefix;
  ItemId target = 0;
};

// Every prefix of length >= 1 predicts its successor, so a session of length
// l yields l - 1 events. The spans alias the session storage, which must
// outlive the events.
inline std::vector<PredictionEvent> expand_prediction_events(
    std::span<const Session> sessions) {
  std::vector<PredictionEvent> events;
  for (const auto& session : sessions) {
    for (std::size_t pos = 1; pos < session.items.size(); ++pos) {
      events.push_back({session.user_id,
                        std::span<const ItemId>(session.items.data(), pos),
                        session.items[pos]});
    }
  }
  return events;
}

struct TrainStats {
  std::vector<double> epoch_mean_losses;
  std::size_t adam_steps = 0;
  std::size_t epochs_run = 0;
};

// Minibatch cross-entropy training over all prediction events of `sessions`.
// Event order is reshuffled every epoch. A positive plateau_rel_tol enables
// early stopping once the mean epoch loss stops improving by that relative
// amount.
inline TrainStats train_minibatch(ModelParams& params,
                                  std::span<const Session> sessions,
                                  std::size_t epochs, Rng& rng,
                                  double plateau_rel_tol = 0.0) {
  TrainStats stats;
  const std::vector<PredictionEvent> events =
      expand_prediction_events(sessions);
  if (events.empty() || epochs == 0) return stats;

  std::vector<SessionGraph> graphs;
  graphs.reserve(events.size());
  for (const auto& event : events) {
    graphs.push_back(
        build_session_graph(event.user, event.prefix, params.num_items()));
  }

  const std::size_t batch_size = params.config.batch_size;
  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    double total_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t count = std::min(batch_size, order.size() - start);
      std::vector<ForwardResult> results;
      results.reserve(count);
      std::vector<BatchItem> batch;
      batch.reserve(count);
      for (std::size_t b = 0; b < count; ++b) {
        const std::size_t idx = order[start + b];
        results.push_back(forward(graphs[idx], params));
        total_loss += event_loss(results.back().pred, events[idx].target);
        batch.push_back({&graphs[idx], &results.back(), events[idx].target});
      }
      const Gradients grads = backward(batch, params);
      adam_step(params, grads, params.config);
      ++stats.adam_steps;
    }
    stats.epoch_mean_losses.push_back(total_loss /
                                      static_cast<double>(events.size()));
    ++stats.epochs_run;
    if (plateau_rel_tol > 0.0 && stats.epoch_mean_losses.size() >= 2) {
      const double prev =
          stats.epoch_mean_losses[stats.epoch_mean_losses.size() - 2];
      const double cur = stats.epoch_mean_losses.back();
      if (prev - cur <= plateau_rel_tol * std::abs(prev)) break;
    }
  }
  return stats;
}

}  // namespace gag
