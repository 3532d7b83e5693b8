#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gag/error.hpp"
#include "gag/mat.hpp"
#include "gag/model.hpp"
#include "gag/session_graph.hpp"

namespace gag {

// Probability floor applied before logarithms.
inline constexpr double kProbFloor = 1e-12;

// Scores and probabilities over the full item catalog for one session.
struct PredictionDistribution {
  Vec scores;  // raw dot products, one per catalog item
  Vec probs;   // softmax of scores
};

// Everything one layer computed, retained for the backward pass.
struct LayerActivations {
  Mat input_feats;   // node features fed to the layer (nodes x d)
  Vec input_global;  // global attribute fed to the layer
  Mat edge_in;       // per-edge in-messages (edges x d)
  Mat edge_out;      // per-edge out-messages (edges x d)
  Mat agg_in;        // per-node normalized in-neighborhood sums
  Mat agg_out;       // per-node normalized out-neighborhood sums
  Mat node_feats;    // updated node features
  Vec attn;          // per-node attention scalars
  Vec readout;       // attention-weighted sum of node features
  Vec global_out;    // readout + input_global
};

struct ForwardResult {
  PredictionDistribution pred;
  std::vector<LayerActivations> layers;
  UserId user_id = 0;
};

// Max-subtracted softmax; invariant to adding a constant to all scores.
inline Vec softmax(const Vec& scores) {
  if (scores.empty()) throw ContractError("softmax: empty score vector");
  const double mx = *std::max_element(scores.begin(), scores.end());
  Vec probs(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    probs[i] = std::exp(scores[i] - mx);
    total += probs[i];
  }
  for (double& p : probs) p /= total;
  return probs;
}

// Per-edge messages: each edge emits two d-vectors computed from the sender
// feature concatenated with the global attribute, scaled by the edge weight.
// The in/out maps are separate parameter sets. Edge weights themselves are
// never updated.
inline std::pair<Mat, Mat> edge_messages(const SessionGraph& graph,
                                         const Mat& node_feats,
                                         const Vec& global_attr,
                                         const LayerWeights& weights,
                                         bool edge_out_uses_receiver = false) {
  const std::size_t d = node_feats.cols();
  if (node_feats.rows() != graph.num_nodes()) {
    throw ShapeError("edge_messages: feature rows != node count");
  }
  if (global_attr.size() != d) {
    throw ShapeError("edge_messages: global attribute size != embed dim");
  }
  Mat e_in(graph.num_edges(), d);
  Mat e_out(graph.num_edges(), d);
  Vec cat(2 * d);
  std::copy(global_attr.begin(), global_attr.end(), cat.begin() + d);
  for (std::size_t k = 0; k < graph.num_edges(); ++k) {
    const auto& edge = graph.edges[k];
    const double w = static_cast<double>(edge.weight);

    auto feat = node_feats.row(edge.src);
    std::copy(feat.begin(), feat.end(), cat.begin());
    affine(weights.edge_in_weight.value, weights.edge_in_bias.value.row(0),
           cat, e_in.row(k));
    for (double& v : e_in.row(k)) v *= w;

    const std::int32_t out_node =
        edge_out_uses_receiver ? edge.dst : edge.src;
    feat = node_feats.row(out_node);
    std::copy(feat.begin(), feat.end(), cat.begin());
    affine(weights.edge_out_weight.value, weights.edge_out_bias.value.row(0),
           cat, e_out.row(k));
    for (double& v : e_out.row(k)) v *= w;
  }
  return {std::move(e_in), std::move(e_out)};
}

struct NodeAggregates {
  Mat agg_in;
  Mat agg_out;
  Mat node_feats;
};

// Degree-normalized neighborhood sums followed by the node update map.
// A node's in-aggregate collects the out-messages of edges arriving at it,
// each divided by sqrt(in_degree(receiver) * out_degree(sender)); the
// out-aggregate mirrors that for departing edges. Empty neighborhoods (or a
// zero normalizer, possible only for zero-weight edges) contribute nothing.
inline NodeAggregates aggregate_nodes(const SessionGraph& graph,
                                      const Mat& edge_in, const Mat& edge_out,
                                      const LayerWeights& weights) {
  const std::size_t n = graph.num_nodes();
  const std::size_t d = edge_in.cols();
  if (edge_in.rows() != graph.num_edges() ||
      edge_out.rows() != graph.num_edges()) {
    throw ShapeError("aggregate_nodes: message rows != edge count");
  }
  NodeAggregates out{Mat(n, d), Mat(n, d), Mat(n, d)};
  for (std::size_t k = 0; k < graph.num_edges(); ++k) {
    const auto& edge = graph.edges[k];
    const double norm =
        std::sqrt(static_cast<double>(graph.in_degree[edge.dst]) *
                  static_cast<double>(graph.out_degree[edge.src]));
    if (norm > 0.0) {
      axpy(1.0 / norm, edge_out.row(k), out.agg_in.row(edge.dst));
      axpy(1.0 / norm, edge_in.row(k), out.agg_out.row(edge.src));
    }
  }
  Vec cat(2 * d);
  for (std::size_t i = 0; i < n; ++i) {
    auto in_row = out.agg_in.row(i);
    auto out_row = out.agg_out.row(i);
    std::copy(in_row.begin(), in_row.end(), cat.begin());
    std::copy(out_row.begin(), out_row.end(), cat.begin() + d);
    affine(weights.node_weight.value, weights.node_bias.value.row(0), cat,
           out.node_feats.row(i));
  }
  return out;
}

struct GlobalUpdateResult {
  Vec attn;        // one raw (unnormalized) scalar per node
  Vec readout;     // sum of attn[i] * node_feats[i]
  Vec global_out;  // readout + global_attr (residual)
};

// Self-attention on the last session item: each node's weight comes from an
// affine map over (last node feature, node feature, global attribute); the
// weighted node sum plus a residual yields the updated global attribute.
inline GlobalUpdateResult global_update(const Mat& node_feats,
                                        std::int32_t last_node,
                                        const Vec& global_attr,
                                        const LayerWeights& weights) {
  const std::size_t n = node_feats.rows();
  const std::size_t d = node_feats.cols();
  if (n == 0) throw ContractError("global_update: no nodes");
  if (last_node < 0 || static_cast<std::size_t>(last_node) >= n) {
    throw ContractError("global_update: last_node out of range");
  }
  GlobalUpdateResult out;
  out.attn.resize(n);
  out.readout.assign(d, 0.0);

  Vec cat(3 * d);
  auto last = node_feats.row(last_node);
  std::copy(last.begin(), last.end(), cat.begin());
  std::copy(global_attr.begin(), global_attr.end(), cat.begin() + 2 * d);
  const auto attn_row = weights.attn_weight.value.row(0);
  const double attn_bias = weights.attn_bias.value(0, 0);
  for (std::size_t i = 0; i < n; ++i) {
    auto feat = node_feats.row(i);
    std::copy(feat.begin(), feat.end(), cat.begin() + d);
    out.attn[i] = attn_bias + dot(attn_row, cat);
    axpy(out.attn[i], feat, out.readout);
  }
  out.global_out.resize(d);
  for (std::size_t c = 0; c < d; ++c) {
    out.global_out[c] = out.readout[c] + global_attr[c];
  }
  return out;
}

// Full forward pass: stacked layers (each consuming the previous layer's node
// features and global attribute), then catalog scoring from the final global
// attribute and a softmax. Activations are retained for backward().
inline ForwardResult forward(const SessionGraph& graph,
                             const ModelParams& params) {
  const auto& config = params.config;
  const std::size_t d = config.embed_dim;
  if (graph.nodes.empty()) throw ContractError("forward: empty graph");
  if (!in_catalog(graph.user_id, params.num_users())) {
    throw CatalogError("user id " + std::to_string(graph.user_id) +
                       " outside user table of size " +
                       std::to_string(params.num_users()));
  }

  Mat feats(graph.num_nodes(), d);
  for (std::size_t i = 0; i < graph.num_nodes(); ++i) {
    const ItemId item = graph.nodes[i];
    if (!in_catalog(item, params.num_items())) {
      throw CatalogError("item id " + std::to_string(item) +
                         " outside catalog of size " +
                         std::to_string(params.num_items()));
    }
    auto src = params.item_embeddings.value.row(item);
    std::copy(src.begin(), src.end(), feats.row(i).begin());
  }
  auto user_row = params.user_embeddings.value.row(graph.user_id);
  Vec global_attr(user_row.begin(), user_row.end());

  ForwardResult result;
  result.user_id = graph.user_id;
  result.layers.reserve(config.num_layers);
  for (const auto& layer : params.layers) {
    LayerActivations act;
    act.input_feats = feats;
    act.input_global = global_attr;
    std::tie(act.edge_in, act.edge_out) = edge_messages(
        graph, feats, global_attr, layer, config.edge_out_uses_receiver);
    NodeAggregates agg =
        aggregate_nodes(graph, act.edge_in, act.edge_out, layer);
    act.agg_in = std::move(agg.agg_in);
    act.agg_out = std::move(agg.agg_out);
    act.node_feats = std::move(agg.node_feats);
    GlobalUpdateResult gu =
        global_update(act.node_feats, graph.last_node, global_attr, layer);
    act.attn = std::move(gu.attn);
    act.readout = std::move(gu.readout);
    act.global_out = std::move(gu.global_out);

    feats = act.node_feats;
    global_attr = act.global_out;
    result.layers.push_back(std::move(act));
  }

  const std::size_t m = params.num_items();
  result.pred.scores.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    result.pred.scores[i] = dot(params.item_embeddings.value.row(i),
                                std::span<const double>(global_attr));
  }
  result.pred.probs = softmax(result.pred.scores);
  return result;
}

// Cross-entropy of one prediction event; probabilities are floored before
// the logarithm so the loss stays finite.
inline double event_loss(const PredictionDistribution& pred, ItemId target) {
  if (!in_catalog(target, pred.probs.size())) {
    throw CatalogError("loss target " + std::to_string(target) +
                       " outside catalog of size " +
                       std::to_string(pred.probs.size()));
  }
  return -std::log(std::max(pred.probs[target], kProbFloor));
}

// Summed cross-entropy over a batch.
inline double batch_loss(std::span<const PredictionDistribution> preds,
                         std::span<const ItemId> targets) {
  if (preds.size() != targets.size()) {
    throw ShapeError("batch_loss: prediction/target count mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    total += event_loss(preds[i], targets[i]);
  }
  return total;
}

// Top-K items by probability, ties broken by ascending item id.
inline std::vector<std::pair<ItemId, double>> recommend_topk(
    const PredictionDistribution& pred, std::size_t k) {
  const std::size_t m = pred.probs.size();
  if (k == 0 || k > m) {
    throw ConfigError("recommend_topk: K must be in [1, catalog size]");
  }
  std::vector<ItemId> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](ItemId a, ItemId b) {
                      if (pred.probs[a] != pred.probs[b]) {
                        return pred.probs[a] > pred.probs[b];
                      }
                      return a < b;
                    });
  std::vector<std::pair<ItemId, double>> top;
  top.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    top.emplace_back(order[i], pred.probs[order[i]]);
  }
  return top;
}

}  // namespace gag
