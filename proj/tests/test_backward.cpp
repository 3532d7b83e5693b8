#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gag/adam.hpp"
#include "gag/backward.hpp"
#include "gag/forward.hpp"
#include "gag/rng.hpp"
#include "gag/session_graph.hpp"
#include "helpers/finite_diff.hpp"
#include "helpers/test_util.hpp"

using gag::ItemId;
using gag_test::make_session;
using gag_test::tiny_model;

namespace {

// Random session over at most max_nodes distinct items.
std::vector<ItemId> random_session_items(gag::Rng& rng, std::size_t num_items,
                                         std::size_t max_nodes) {
  const std::size_t distinct = 1 + rng.next_index(max_nodes);
  std::vector<ItemId> alphabet;
  for (std::size_t i = 0; i < distinct; ++i) {
    alphabet.push_back(static_cast<ItemId>(rng.next_index(num_items)));
  }
  const std::size_t len = distinct + rng.next_index(3);
  std::vector<ItemId> items;
  for (std::size_t i = 0; i < len; ++i) {
    items.push_back(alphabet[rng.next_index(alphabet.size())]);
  }
  return items;
}

}  // namespace

TEST(Backward, MatchesCentralFiniteDifferences) {
  gag::Rng rng(2024);
  int configs_checked = 0;
  for (int trial = 0; trial < 24; ++trial) {
    gag::ModelConfig config;
    config.embed_dim = 2 + rng.next_index(7);  // up to 8
    config.num_layers = 1 + rng.next_index(2);
    config.rng_seed = rng.next_u64();
    config.edge_out_uses_receiver = trial % 3 == 0;
    const std::size_t num_items = 2 + rng.next_index(5);  // up to 6
    const std::size_t num_users = 1 + rng.next_index(3);

    auto params = gag::init_model(config, num_items, num_users);
    const std::size_t batch = 1 + rng.next_index(2);
    std::vector<gag::SessionGraph> graphs;
    std::vector<ItemId> targets;
    for (std::size_t b = 0; b < batch; ++b) {
      const auto items = random_session_items(rng, num_items, 3);
      graphs.push_back(gag::build_session_graph(
          make_session(static_cast<gag::UserId>(rng.next_index(num_users)),
                       items),
          num_items));
      targets.push_back(static_cast<ItemId>(rng.next_index(num_items)));
    }
    const auto result = gag_test::gradcheck(params, graphs, targets);
    EXPECT_TRUE(result.ok())
        << "trial " << trial << ": " << result.entries_failed << "/"
        << result.entries_checked
        << " entries failed, worst abs err = " << result.worst_abs_err;
    ++configs_checked;
  }
  EXPECT_GE(configs_checked, 20);
}

TEST(Backward, NearZeroGradientAtSaturatedTarget) {
  auto p = tiny_model(4, 5, 1, 7);
  const auto graph = gag::build_session_graph(make_session(0, {0, 1}), 5);
  const ItemId target = 3;
  // blow up the target item's score so softmax saturates at the target
  auto user_row = p.user_embeddings.value.row(0);
  for (std::size_t c = 0; c < 4; ++c) {
    p.item_embeddings.value(target, c) = 400.0 * (user_row[c] > 0 ? 1 : -1);
  }
  gag_test::zero_layer_weights(p);  // u' = u, scores = u . x
  const auto fwd = gag::forward(graph, p);
  ASSERT_GT(fwd.pred.probs[target], 1.0 - 1e-12);
  const gag::BatchItem item{&graph, &fwd, target};
  const auto grads = gag::backward({&item, 1}, p);
  EXPECT_LE(grads.max_abs(), 1e-8);
}

TEST(Backward, UntouchedUserRowsHaveZeroGradient) {
  const auto p = tiny_model(4, 6, 3, 11);
  const auto graph = gag::build_session_graph(make_session(1, {0, 2, 4}), 6);
  const auto fwd = gag::forward(graph, p);
  const gag::BatchItem item{&graph, &fwd, 5};
  const auto grads = gag::backward({&item, 1}, p);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_EQ(grads.user_embeddings(0, c), 0.0);
    EXPECT_EQ(grads.user_embeddings(2, c), 0.0);
  }
  // the session's own user row received signal
  double user1 = 0.0;
  for (std::size_t c = 0; c < 4; ++c) {
    user1 += std::abs(grads.user_embeddings(1, c));
  }
  EXPECT_GT(user1, 0.0);
}

TEST(Backward, StaleActivationsRejected) {
  auto p = tiny_model(4, 6, 2, 11);
  const auto graph = gag::build_session_graph(make_session(1, {0, 2, 4}), 6);
  const auto fwd = gag::forward(graph, p);

  // catalog grew after the forward pass: activations are stale
  gag::grow_catalog(p, 8, 2);
  const gag::BatchItem stale{&graph, &fwd, 1};
  EXPECT_THROW(gag::backward({&stale, 1}, p), gag::ContractError);
}

TEST(Backward, MismatchedGraphRejected) {
  const auto p = tiny_model(4, 6, 2, 11);
  const auto graph = gag::build_session_graph(make_session(1, {0, 2, 4}), 6);
  const auto other = gag::build_session_graph(make_session(0, {1, 3}), 6);
  const auto fwd = gag::forward(graph, p);
  const gag::BatchItem item{&other, &fwd, 1};
  EXPECT_THROW(gag::backward({&item, 1}, p), gag::ContractError);
}
