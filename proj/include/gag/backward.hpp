#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gag/error.hpp"
#include "gag/forward.hpp"
#include "gag/mat.hpp"
#include "gag/model.hpp"
#include "gag/session_graph.hpp"

namespace gag {

struct LayerGradients {
  Mat edge_in_weight, edge_in_bias;
  Mat edge_out_weight, edge_out_bias;
  Mat node_weight, node_bias;
  Mat attn_weight, attn_bias;
};

// Gradient of a batch loss with respect to every parameter tensor, laid out
// to mirror ModelParams.
struct Gradients {
  Mat item_embeddings;
  Mat user_embeddings;
  std::vector<LayerGradients> layers;

  static Gradients zeros_like(const ModelParams& params) {
    const std::size_t d = params.embed_dim();
    Gradients g;
    g.item_embeddings = Mat(params.num_items(), d);
    g.user_embeddings = Mat(params.num_users(), d);
    g.layers.resize(params.layers.size());
    for (auto& layer : g.layers) {
      layer.edge_in_weight = Mat(d, 2 * d);
      layer.edge_in_bias = Mat(1, d);
      layer.edge_out_weight = Mat(d, 2 * d);
      layer.edge_out_bias = Mat(1, d);
      layer.node_weight = Mat(d, 2 * d);
      layer.node_bias = Mat(1, d);
      layer.attn_weight = Mat(1, 3 * d);
      layer.attn_bias = Mat(1, 1);
    }
    return g;
  }

  // Visits every gradient matrix in the same order ModelParams visits its
  // tensors; adam_step relies on the two sequences being aligned.
  template <typename Fn>
  void for_each_mat(Fn&& fn) {
    fn(item_embeddings);
    fn(user_embeddings);
    for (auto& layer : layers) {
      fn(layer.edge_in_weight);
      fn(layer.edge_in_bias);
      fn(layer.edge_out_weight);
      fn(layer.edge_out_bias);
      fn(layer.node_weight);
      fn(layer.node_bias);
      fn(layer.attn_weight);
      fn(layer.attn_bias);
    }
  }

  template <typename Fn>
  void for_each_mat(Fn&& fn) const {
    fn(item_embeddings);
    fn(user_embeddings);
    for (const auto& layer : layers) {
      fn(layer.edge_in_weight);
      fn(layer.edge_in_bias);
      fn(layer.edge_out_weight);
      fn(layer.edge_out_bias);
      fn(layer.node_weight);
      fn(layer.node_bias);
      fn(layer.attn_weight);
      fn(layer.attn_bias);
    }
  }

  double max_abs() const {
    double mx = 0.0;
    for_each_mat([&](const Mat& m) {
      for (double v : m.values()) mx = std::max(mx, std::abs(v));
    });
    return mx;
  }

  bool all_finite() const {
    bool ok = true;
    for_each_mat([&](const Mat& m) { ok = ok && m.all_finite(); });
    return ok;
  }
};

// One session of a training batch: the graph it was scored on, the retained
// forward activations, and the next-item target.
struct BatchItem {
  const SessionGraph* graph = nullptr;
  const ForwardResult* result = nullptr;
  ItemId target = 0;
};

namespace detail {

inline void check_activations(const SessionGraph& graph,
                              const ForwardResult& fwd,
                              const ModelParams& params) {
  if (fwd.layers.size() != params.config.num_layers) {
    throw ContractError("backward: activation layer count mismatch");
  }
  if (fwd.pred.scores.size() != params.num_items() ||
      fwd.pred.probs.size() != params.num_items()) {
    throw ContractError(
        "backward: stale activations (catalog size changed since forward)");
  }
  if (fwd.user_id != graph.user_id) {
    throw ContractError("backward: activations belong to a different session");
  }
  const std::size_t d = params.embed_dim();
  for (const auto& act : fwd.layers) {
    if (act.input_feats.rows() != graph.num_nodes() ||
        act.input_feats.cols() != d ||
        act.edge_in.rows() != graph.num_edges() ||
        act.edge_out.rows() != graph.num_edges() ||
        act.node_feats.rows() != graph.num_nodes() ||
        act.attn.size() != graph.num_nodes()) {
      throw ContractError(
          "backward: stale activations (graph shape mismatch)");
    }
  }
}

// Accumulates the exact gradient of one session's cross-entropy into grads.
inline void accumulate_backward(const SessionGraph& graph,
                                const ForwardResult& fwd, ItemId target,
                                const ModelParams& params, Gradients& grads) {
  check_activations(graph, fwd, params);
  const std::size_t m = params.num_items();
  const std::size_t d = params.embed_dim();
  const std::size_t n = graph.num_nodes();
  if (!in_catalog(target, m)) {
    throw CatalogError("backward: target outside catalog");
  }

  // d(-log max(p_target, floor))/d score = probs - onehot(target); zero when
  // the floor is active because the loss is locally constant there.
  const Vec& probs = fwd.pred.probs;
  if (!(probs[target] > kProbFloor)) return;
  Vec dscore = probs;
  dscore[target] -= 1.0;

  // Scoring: score_i = x_i . u_final.
  const Vec& u_final = fwd.layers.back().global_out;
  Vec dglobal_out(d, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    axpy(dscore[i], params.item_embeddings.value.row(i), dglobal_out);
    axpy(dscore[i], std::span<const double>(u_final),
         grads.item_embeddings.row(i));
  }

  // Walk the layers in reverse, converting gradients w.r.t. a layer's outputs
  // (node features, global attribute) into gradients w.r.t. its inputs.
  Mat dnode_out(n, d);  // zero: the final layer's node features are unused
  for (std::size_t layer_idx = params.layers.size(); layer_idx-- > 0;) {
    const LayerActivations& act = fwd.layers[layer_idx];
    const LayerWeights& w = params.layers[layer_idx];
    LayerGradients& gw = grads.layers[layer_idx];

    // global_out = readout + input_global (residual)
    Vec dglobal_in = dglobal_out;
    const Vec dreadout = std::move(dglobal_out);

    // readout = sum_i attn[i] * node_feats[i]
    Mat dnode = std::move(dnode_out);
    Vec dattn(n);
    for (std::size_t i = 0; i < n; ++i) {
      dattn[i] = dot(dreadout, act.node_feats.row(i));
      axpy(act.attn[i], std::span<const double>(dreadout), dnode.row(i));
    }

    // attn[i] = attn_weight . (last_feat, feat_i, input_global) + attn_bias
    {
      const auto attn_row = w.attn_weight.value.row(0);
      Vec cat(3 * d);
      auto last = act.node_feats.row(graph.last_node);
      std::copy(last.begin(), last.end(), cat.begin());
      std::copy(act.input_global.begin(), act.input_global.end(),
                cat.begin() + 2 * d);
      for (std::size_t i = 0; i < n; ++i) {
        auto feat = act.node_feats.row(i);
        std::copy(feat.begin(), feat.end(), cat.begin() + d);
        gw.attn_bias(0, 0) += dattn[i];
        axpy(dattn[i], std::span<const double>(cat), gw.attn_weight.row(0));
        axpy(dattn[i], attn_row.subspan(0, d), dnode.row(graph.last_node));
        axpy(dattn[i], attn_row.subspan(d, d), dnode.row(i));
        axpy(dattn[i], attn_row.subspan(2 * d, d),
             std::span<double>(dglobal_in));
      }
    }

    // node_feats[i] = node_weight . (agg_in_i, agg_out_i) + node_bias
    Mat dagg_in(n, d);
    Mat dagg_out(n, d);
    {
      Vec cat(2 * d);
      Vec dcat(2 * d);
      for (std::size_t i = 0; i < n; ++i) {
        auto in_row = act.agg_in.row(i);
        auto out_row = act.agg_out.row(i);
        std::copy(in_row.begin(), in_row.end(), cat.begin());
        std::copy(out_row.begin(), out_row.end(), cat.begin() + d);
        add_outer(gw.node_weight, dnode.row(i), cat);
        axpy(1.0, dnode.row(i), gw.node_bias.row(0));
        std::fill(dcat.begin(), dcat.end(), 0.0);
        add_matvec_transposed(w.node_weight.value, dnode.row(i), dcat);
        axpy(1.0, std::span<const double>(dcat).subspan(0, d), dagg_in.row(i));
        axpy(1.0, std::span<const double>(dcat).subspan(d, d),
             dagg_out.row(i));
      }
    }

    // agg_in(dst) += edge_out[k]/norm_k ; agg_out(src) += edge_in[k]/norm_k
    Mat dedge_in(graph.num_edges(), d);
    Mat dedge_out(graph.num_edges(), d);
    for (std::size_t k = 0; k < graph.num_edges(); ++k) {
      const auto& edge = graph.edges[k];
      const double norm =
          std::sqrt(static_cast<double>(graph.in_degree[edge.dst]) *
                    static_cast<double>(graph.out_degree[edge.src]));
      if (norm > 0.0) {
        axpy(1.0 / norm, dagg_in.row(edge.dst), dedge_out.row(k));
        axpy(1.0 / norm, dagg_out.row(edge.src), dedge_in.row(k));
      }
    }

    // edge_in[k] = w_k * (edge_in_weight . (feat_src, input_global) + bias);
    // edge_out[k] likewise from the configured out-feature node.
    Mat dinput_feats(n, d);
    {
      Vec cat(2 * d);
      Vec gvec(d);
      Vec dcat(2 * d);
      std::copy(act.input_global.begin(), act.input_global.end(),
                cat.begin() + d);
      for (std::size_t k = 0; k < graph.num_edges(); ++k) {
        const auto& edge = graph.edges[k];
        const double weight = static_cast<double>(edge.weight);

        auto feat = act.input_feats.row(edge.src);
        std::copy(feat.begin(), feat.end(), cat.begin());
        for (std::size_t c = 0; c < d; ++c) {
          gvec[c] = weight * dedge_in(k, c);
        }
        add_outer(gw.edge_in_weight, gvec, cat);
        axpy(1.0, std::span<const double>(gvec), gw.edge_in_bias.row(0));
        std::fill(dcat.begin(), dcat.end(), 0.0);
        add_matvec_transposed(w.edge_in_weight.value, gvec, dcat);
        axpy(1.0, std::span<const double>(dcat).subspan(0, d),
             dinput_feats.row(edge.src));
        axpy(1.0, std::span<const double>(dcat).subspan(d, d),
             std::span<double>(dglobal_in));

        const std::int32_t out_node =
            params.config.edge_out_uses_receiver ? edge.dst : edge.src;
        feat = act.input_feats.row(out_node);
        std::copy(feat.begin(), feat.end(), cat.begin());
        for (std::size_t c = 0; c < d; ++c) {
          gvec[c] = weight * dedge_out(k, c);
        }
        add_outer(gw.edge_out_weight, gvec, cat);
        axpy(1.0, std::span<const double>(gvec), gw.edge_out_bias.row(0));
        std::fill(dcat.begin(), dcat.end(), 0.0);
        add_matvec_transposed(w.edge_out_weight.value, gvec, dcat);
        axpy(1.0, std::span<const double>(dcat).subspan(0, d),
             dinput_feats.row(out_node));
        axpy(1.0, std::span<const double>(dcat).subspan(d, d),
             std::span<double>(dglobal_in));
      }
    }

    // Hand off to the previous layer (whose outputs are this layer's inputs).
    dnode_out = std::move(dinput_feats);
    dglobal_out = std::move(dglobal_in);
  }

  // Layer-0 inputs are embedding rows.
  for (std::size_t i = 0; i < n; ++i) {
    axpy(1.0, dnode_out.row(i), grads.item_embeddings.row(graph.nodes[i]));
  }
  axpy(1.0, std::span<const double>(dglobal_out),
       grads.user_embeddings.row(graph.user_id));
}

}  // namespace detail

// Exact gradient of the summed batch cross-entropy with respect to every
// parameter tensor. Requires the forward activations of the same batch.
inline Gradients backward(std::span<const BatchItem> batch,
                          const ModelParams& params) {
  Gradients grads = Gradients::zeros_like(params);
  for (const auto& item : batch) {
    if (item.graph == nullptr || item.result == nullptr) {
      throw ContractError("backward: null batch entry");
    }
    detail::accumulate_backward(*item.graph, *item.result, item.target, params,
                                grads);
  }
  return grads;
}

}  // namespace gag
