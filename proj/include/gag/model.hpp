#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "gag/error.hpp"
#include "gag/mat.hpp"
#include "gag/rng.hpp"

namespace gag {

// Hyperparameters fixed at model construction.
struct ModelConfig {
  std::size_t embed_dim = 200;
  std::size_t num_layers = 1;
  double learning_rate = 0.003;
  std::size_t batch_size = 100;
  std::uint64_t rng_seed = 0;
  // Feed the receiver feature (instead of the sender feature) to the
  // out-edge message map. Off by default; kept switchable because both
  // wirings are defensible.
  bool edge_out_uses_receiver = false;

  void validate() const {
    if (embed_dim == 0) throw ConfigError("embed_dim must be >= 1");
    if (num_layers == 0) throw ConfigError("num_layers must be >= 1");
    if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
    if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  }

  bool operator==(const ModelConfig&) const = default;
};

// One trainable array plus its Adam state.
struct Tensor {
  Mat value;
  Mat moment1;
  Mat moment2;
  std::int64_t step = 0;

  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols)
      : value(rows, cols), moment1(rows, cols), moment2(rows, cols) {}

  bool operator==(const Tensor&) const = default;
};

// Affine maps of one layer: in/out edge messages, node update, attention.
// Weight shapes (d = embed_dim): edge maps d x 2d, node map d x 2d,
// attention map 1 x 3d; biases are row vectors.
struct LayerWeights {
  Tensor edge_in_weight, edge_in_bias;
  Tensor edge_out_weight, edge_out_bias;
  Tensor node_weight, node_bias;
  Tensor attn_weight, attn_bias;

  bool operator==(const LayerWeights&) const = default;
};

struct ModelParams {
  ModelConfig config;
  Tensor item_embeddings;  // catalog size x d
  Tensor user_embeddings;  // user count x d
  std::vector<LayerWeights> layers;

  std::size_t num_items() const { return item_embeddings.value.rows(); }
  std::size_t num_users() const { return user_embeddings.value.rows(); }
  std::size_t embed_dim() const { return config.embed_dim; }

  // Visits every tensor in checkpoint declaration order.
  template <typename Fn>
  void for_each_tensor(Fn&& fn) {
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
  void for_each_tensor(Fn&& fn) const {
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

  bool all_finite() const {
    bool ok = true;
    for_each_tensor([&](const Tensor& t) { ok = ok && t.value.all_finite(); });
    return ok;
  }

  bool operator==(const ModelParams&) const = default;
};

namespace detail {

inline void fill_uniform(Mat& mat, double bound, Rng& rng) {
  for (std::size_t i = 0; i < mat.size(); ++i) {
    mat.data()[i] = rng.next_double(-bound, bound);
  }
}

constexpr std::uint64_t kGrowSalt = 0x67726f77ULL;  // "grow"

}  // namespace detail

// Fresh model with all weights drawn uniformly from [-1/sqrt(d), 1/sqrt(d)]
// and zeroed optimizer state. Deterministic given config.rng_seed.
inline ModelParams init_model(const ModelConfig& config, std::size_t num_items,
                              std::size_t num_users) {
  config.validate();
  if (num_items == 0 || num_users == 0) {
    throw ConfigError("catalog must contain at least one item and one user");
  }
  const std::size_t d = config.embed_dim;

  ModelParams params;
  params.config = config;
  params.item_embeddings = Tensor(num_items, d);
  params.user_embeddings = Tensor(num_users, d);
  params.layers.resize(config.num_layers);
  for (auto& layer : params.layers) {
    layer.edge_in_weight = Tensor(d, 2 * d);
    layer.edge_in_bias = Tensor(1, d);
    layer.edge_out_weight = Tensor(d, 2 * d);
    layer.edge_out_bias = Tensor(1, d);
    layer.node_weight = Tensor(d, 2 * d);
    layer.node_bias = Tensor(1, d);
    layer.attn_weight = Tensor(1, 3 * d);
    layer.attn_bias = Tensor(1, 1);
  }

  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  Rng rng(config.rng_seed);
  params.for_each_tensor(
      [&](Tensor& t) { detail::fill_uniform(t.value, bound, rng); });
  return params;
}

// Extends the embedding tables for newly observed items/users. Existing rows
// and their optimizer state are preserved bitwise; new rows get a fresh
// seeded uniform draw and zero moments.
inline void grow_catalog(ModelParams& params, std::size_t new_num_items,
                         std::size_t new_num_users) {
  const std::size_t old_items = params.num_items();
  const std::size_t old_users = params.num_users();
  if (new_num_items < old_items || new_num_users < old_users) {
    throw ConfigError("grow_catalog: catalog cannot shrink (items " +
                      std::to_string(old_items) + "->" +
                      std::to_string(new_num_items) + ", users " +
                      std::to_string(old_users) + "->" +
                      std::to_string(new_num_users) + ")");
  }
  if (new_num_items == old_items && new_num_users == old_users) return;

  const std::size_t d = params.embed_dim();
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  Rng rng(mix_seed(mix_seed(mix_seed(params.config.rng_seed, detail::kGrowSalt),
                            new_num_items),
                   new_num_users));

  auto grow = [&](Tensor& t, std::size_t new_rows) {
    const std::size_t old_rows = t.value.rows();
    t.value.resize_rows(new_rows);
    t.moment1.resize_rows(new_rows);
    t.moment2.resize_rows(new_rows);
    for (std::size_t r = old_rows; r < new_rows; ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        t.value(r, c) = rng.next_double(-bound, bound);
      }
    }
  };
  grow(params.item_embeddings, new_num_items);
  grow(params.user_embeddings, new_num_users);
}

// FNV-1a over tensor shapes and raw values; handy for change detection.
inline std::uint64_t params_fingerprint(const ModelParams& params) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto mix = [&hash](std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      hash ^= (word >> (8 * i)) & 0xff;
      hash *= 0x100000001b3ULL;
    }
  };
  params.for_each_tensor([&](const Tensor& t) {
    mix(t.value.rows());
    mix(t.value.cols());
    for (double v : t.value.values()) {
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(v));
      std::memcpy(&bits, &v, sizeof(bits));
      mix(bits);
    }
  });
  return hash;
}

}  // namespace gag
