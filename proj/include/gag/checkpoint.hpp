#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gag/error.hpp"
#include "gag/model.hpp"

namespace gag {

// Model checkpoint, little-endian binary:
//
//   bytes 0..3   magic "GAG1"
//   u32          layout version (1)
//   u64          embed_dim
//   u64          num_layers
//   f64          learning_rate
//   u64          batch_size
//   u64          rng_seed
//   u8           edge_out_uses_receiver
//   u64          num_items
//   u64          num_users
//   tensors      in declaration order (item embeddings, user embeddings,
//                then per layer: edge-in weight/bias, edge-out weight/bias,
//                node weight/bias, attention weight/bias); each tensor is
//                value, first moment, second moment as raw f64 arrays,
//                followed by an i64 step counter.
//
// A JSON sidecar at <path>.json records the tensor shapes and the RNG seed.

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "checkpoint layout assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
void read_pod(std::istream& in, T& value) {
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  if (!in) throw DataError("checkpoint: truncated file");
}

inline void write_mat(std::ostream& out, const Mat& mat) {
  out.write(reinterpret_cast<const char*>(mat.data()),
            static_cast<std::streamsize>(mat.size() * sizeof(double)));
}

inline void read_mat(std::istream& in, Mat& mat) {
  in.read(reinterpret_cast<char*>(mat.data()),
          static_cast<std::streamsize>(mat.size() * sizeof(double)));
  if (!in) throw DataError("checkpoint: truncated tensor data");
}

}  // namespace detail

inline void save_checkpoint(const ModelParams& params,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint: cannot open " + path + " for write");

  out.write("GAG1", 4);
  detail::write_pod(out, std::uint32_t{1});
  detail::write_pod(out, static_cast<std::uint64_t>(params.config.embed_dim));
  detail::write_pod(out, static_cast<std::uint64_t>(params.config.num_layers));
  detail::write_pod(out, params.config.learning_rate);
  detail::write_pod(out, static_cast<std::uint64_t>(params.config.batch_size));
  detail::write_pod(out, static_cast<std::uint64_t>(params.config.rng_seed));
  detail::write_pod(
      out, static_cast<std::uint8_t>(params.config.edge_out_uses_receiver));
  detail::write_pod(out, static_cast<std::uint64_t>(params.num_items()));
  detail::write_pod(out, static_cast<std::uint64_t>(params.num_users()));

  params.for_each_tensor([&](const Tensor& t) {
    detail::write_mat(out, t.value);
    detail::write_mat(out, t.moment1);
    detail::write_mat(out, t.moment2);
    detail::write_pod(out, t.step);
  });
  if (!out) throw DataError("checkpoint: write failed for " + path);
  out.close();

  nlohmann::json sidecar;
  sidecar["magic"] = "GAG1";
  sidecar["rng_seed"] = params.config.rng_seed;
  nlohmann::json shapes;
  std::size_t index = 0;
  params.for_each_tensor([&](const Tensor& t) {
    shapes["tensor_" + std::to_string(index++)] = {t.value.rows(),
                                                   t.value.cols()};
  });
  sidecar["shapes"] = shapes;
  sidecar["num_items"] = params.num_items();
  sidecar["num_users"] = params.num_users();
  sidecar["embed_dim"] = params.config.embed_dim;
  sidecar["num_layers"] = params.config.num_layers;
  std::ofstream side(path + ".json", std::ios::trunc);
  if (!side) throw DataError("checkpoint: cannot write sidecar for " + path);
  side << sidecar.dump(2) << "\n";
}

inline ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open " + path);

  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "GAG1") {
    throw DataError("checkpoint: bad magic bytes in " + path);
  }
  std::uint32_t version = 0;
  detail::read_pod(in, version);
  if (version != 1) {
    throw DataError("checkpoint: unsupported layout version " +
                    std::to_string(version));
  }

  ModelConfig config;
  std::uint64_t embed_dim = 0, num_layers = 0, batch_size = 0, seed = 0;
  std::uint64_t num_items = 0, num_users = 0;
  std::uint8_t out_flag = 0;
  detail::read_pod(in, embed_dim);
  detail::read_pod(in, num_layers);
  detail::read_pod(in, config.learning_rate);
  detail::read_pod(in, batch_size);
  detail::read_pod(in, seed);
  detail::read_pod(in, out_flag);
  detail::read_pod(in, num_items);
  detail::read_pod(in, num_users);
  config.embed_dim = embed_dim;
  config.num_layers = num_layers;
  config.batch_size = batch_size;
  config.rng_seed = seed;
  config.edge_out_uses_receiver = out_flag != 0;
  config.validate();

  ModelParams params = init_model(config, num_items, num_users);
  params.for_each_tensor([&](Tensor& t) {
    detail::read_mat(in, t.value);
    detail::read_mat(in, t.moment1);
    detail::read_mat(in, t.moment2);
    detail::read_pod(in, t.step);
  });
  return params;
}

}  // namespace gag
