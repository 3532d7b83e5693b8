#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gag/adam.hpp"
#include "gag/checkpoint.hpp"
#include "gag/forward.hpp"
#include "gag/model.hpp"
#include "helpers/test_util.hpp"

using gag_test::make_session;
using gag_test::tiny_model;

TEST(InitModel, DeterministicGivenSeed) {
  const auto a = tiny_model(4, 10, 3, 7);
  const auto b = tiny_model(4, 10, 3, 7);
  EXPECT_EQ(a, b);
}

TEST(InitModel, Shapes) {
  const auto p = tiny_model(4, 10, 3, 1);
  EXPECT_EQ(p.item_embeddings.value.rows(), 10u);
  EXPECT_EQ(p.item_embeddings.value.cols(), 4u);
  EXPECT_EQ(p.user_embeddings.value.rows(), 3u);
  EXPECT_EQ(p.user_embeddings.value.cols(), 4u);
  ASSERT_EQ(p.layers.size(), 1u);
  EXPECT_EQ(p.layers[0].edge_in_weight.value.rows(), 4u);
  EXPECT_EQ(p.layers[0].edge_in_weight.value.cols(), 8u);
  EXPECT_EQ(p.layers[0].node_weight.value.cols(), 8u);
  EXPECT_EQ(p.layers[0].attn_weight.value.rows(), 1u);
  EXPECT_EQ(p.layers[0].attn_weight.value.cols(), 12u);
  EXPECT_EQ(p.layers[0].attn_bias.value.size(), 1u);
}

TEST(InitModel, EntriesWithinBound) {
  const auto p = tiny_model(4, 10, 3, 99);
  const double bound = 1.0 / std::sqrt(4.0);
  p.for_each_tensor([&](const gag::Tensor& t) {
    for (double v : t.value.values()) EXPECT_LE(std::abs(v), bound);
    for (double v : t.moment1.values()) EXPECT_EQ(v, 0.0);
    for (double v : t.moment2.values()) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(t.step, 0);
  });
}

TEST(InitModel, ZeroCatalogRejected) {
  gag::ModelConfig c;
  c.embed_dim = 4;
  EXPECT_THROW(gag::init_model(c, 0, 3), gag::ConfigError);
  EXPECT_THROW(gag::init_model(c, 3, 0), gag::ConfigError);
  c.embed_dim = 0;
  EXPECT_THROW(gag::init_model(c, 3, 3), gag::ConfigError);
}

TEST(GrowCatalog, PreservesExistingRows) {
  auto p = tiny_model(4, 10, 3, 7);
  const auto before = p;
  gag::grow_catalog(p, 12, 3);
  EXPECT_EQ(p.num_items(), 12u);
  for (std::size_t r = 0; r < 10; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_EQ(p.item_embeddings.value(r, c),
                before.item_embeddings.value(r, c));
    }
  }
  // fresh rows carry zero optimizer state
  for (std::size_t r = 10; r < 12; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_EQ(p.item_embeddings.moment1(r, c), 0.0);
      EXPECT_EQ(p.item_embeddings.moment2(r, c), 0.0);
      EXPECT_LE(std::abs(p.item_embeddings.value(r, c)), 0.5);
    }
  }
}

TEST(GrowCatalog, SameSizeIsIdentity) {
  auto p = tiny_model(4, 10, 3, 7);
  const auto before = p;
  gag::grow_catalog(p, 10, 3);
  EXPECT_EQ(p, before);
}

TEST(GrowCatalog, ShrinkRejected) {
  auto p = tiny_model(4, 10, 3, 7);
  EXPECT_THROW(gag::grow_catalog(p, 9, 3), gag::ConfigError);
  EXPECT_THROW(gag::grow_catalog(p, 10, 2), gag::ConfigError);
}

TEST(GrowCatalog, OldItemScoresBitwiseStable) {
  auto p = tiny_model(4, 10, 3, 7);
  const auto session = make_session(1, {2, 5, 2, 7});
  const auto graph_before = gag::build_session_graph(session, p.num_items());
  const auto before = gag::forward(graph_before, p);

  gag::grow_catalog(p, 12, 4);
  const auto graph_after = gag::build_session_graph(session, p.num_items());
  const auto after = gag::forward(graph_after, p);

  ASSERT_EQ(after.pred.scores.size(), 12u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(before.pred.scores[i], after.pred.scores[i]);
  }
}

TEST(AdamStep, ZeroGradZeroMomentsIsFixedPoint) {
  auto p = tiny_model(4, 5, 2, 3);
  const auto before = p;
  const auto grads = gag::Gradients::zeros_like(p);
  gag::adam_step(p, grads, p.config);
  // values unchanged bitwise; only the step counters moved
  bool same = true;
  std::vector<const gag::Tensor*> ta, tb;
  p.for_each_tensor([&](const gag::Tensor& t) { ta.push_back(&t); });
  before.for_each_tensor([&](const gag::Tensor& t) { tb.push_back(&t); });
  for (std::size_t i = 0; i < ta.size(); ++i) {
    same = same && ta[i]->value == tb[i]->value;
    EXPECT_EQ(ta[i]->step, 1);
  }
  EXPECT_TRUE(same);
}

TEST(AdamStep, FirstStepMovesByLearningRate) {
  auto p = tiny_model(2, 2, 1, 3);
  p.config.learning_rate = 0.003;
  auto grads = gag::Gradients::zeros_like(p);
  grads.item_embeddings(0, 0) = 1.0;
  const double before = p.item_embeddings.value(0, 0);
  gag::adam_step(p, grads, p.config);
  const double moved = before - p.item_embeddings.value(0, 0);
  // bias-corrected first step is lr / (1 + eps), a hair under lr
  EXPECT_NEAR(moved, 0.003, 1e-9);
  EXPECT_GT(moved, 0.0);
}

TEST(AdamStep, QuadraticBowlLossDecreasesMonotonically) {
  // minimize sum (theta - c)^2 over the item table with exact gradients
  auto p = tiny_model(3, 4, 1, 5);
  p.config.learning_rate = 0.003;
  gag::Mat target(4, 3);
  for (std::size_t i = 0; i < target.size(); ++i) {
    target.data()[i] = (i % 2 == 0) ? 1.0 : -1.0;
  }
  auto loss_of = [&]() {
    double loss = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
      const double delta = p.item_embeddings.value.data()[i] - target.data()[i];
      loss += delta * delta;
    }
    return loss;
  };
  std::vector<double> losses;
  for (int step = 0; step < 200; ++step) {
    losses.push_back(loss_of());
    auto grads = gag::Gradients::zeros_like(p);
    for (std::size_t i = 0; i < target.size(); ++i) {
      grads.item_embeddings.data()[i] =
          2.0 * (p.item_embeddings.value.data()[i] - target.data()[i]);
    }
    gag::adam_step(p, grads, p.config);
  }
  losses.push_back(loss_of());
  for (std::size_t s = 10; s + 1 < losses.size(); ++s) {
    EXPECT_LT(losses[s + 1], losses[s]) << "at step " << s;
  }
  EXPECT_LT(losses.back(), losses.front());
}

TEST(AdamStep, NaNGradientRefused) {
  auto p = tiny_model(2, 2, 1, 3);
  const auto before = p;
  auto grads = gag::Gradients::zeros_like(p);
  grads.user_embeddings(0, 1) = std::nan("");
  EXPECT_THROW(gag::adam_step(p, grads, p.config), gag::NumericError);
  EXPECT_EQ(p, before);  // refused updates leave the model untouched
}

TEST(Checkpoint, RoundTripsBitwise) {
  auto p = tiny_model(5, 7, 3, 21, 2);
  // give the optimizer state some structure
  auto grads = gag::Gradients::zeros_like(p);
  grads.item_embeddings(1, 2) = 0.25;
  grads.layers[1].attn_weight(0, 3) = -0.5;
  gag::adam_step(p, grads, p.config);

  const std::string path = std::filesystem::temp_directory_path() /
                           "gag_ckpt_roundtrip.bin";
  gag::save_checkpoint(p, path);
  const auto loaded = gag::load_checkpoint(path);
  EXPECT_EQ(p, loaded);
  EXPECT_TRUE(std::filesystem::exists(path + ".json"));
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".json");
}

TEST(Checkpoint, RejectsBadMagic) {
  const std::string path =
      std::filesystem::temp_directory_path() / "gag_ckpt_bad.bin";
  {
    std::ofstream out(path, std::ios::binary);
    out << "NOPE and then some bytes";
  }
  EXPECT_THROW(gag::load_checkpoint(path), gag::DataError);
  std::filesystem::remove(path);
}
