#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "gag/rng.hpp"
#include "gag/session_graph.hpp"
#include "helpers/test_util.hpp"

using gag::ItemId;
using gag::SessionGraph;
using gag::build_session_graph;
using gag::node_degrees;
using gag_test::make_session;

namespace {

SessionGraph::Edge edge(std::int32_t src, std::int32_t dst,
                        std::int32_t weight) {
  return {src, dst, weight};
}

}  // namespace

TEST(SessionGraph, PathSession) {
  const auto g = build_session_graph(make_session(0, {3, 5, 7}), 10);
  EXPECT_EQ(g.nodes, (std::vector<ItemId>{3, 5, 7}));
  ASSERT_EQ(g.edges.size(), 2u);
  EXPECT_EQ(g.edges[0], edge(0, 1, 1));
  EXPECT_EQ(g.edges[1], edge(1, 2, 1));
  EXPECT_EQ(g.last_node, 2);
}

TEST(SessionGraph, RepeatedPairAccumulatesWeight) {
  // [a, b, a, b] -> a->b twice, b->a once
  const auto g = build_session_graph(make_session(0, {1, 2, 1, 2}), 10);
  EXPECT_EQ(g.nodes, (std::vector<ItemId>{1, 2}));
  ASSERT_EQ(g.edges.size(), 2u);
  EXPECT_EQ(g.edges[0], edge(0, 1, 2));
  EXPECT_EQ(g.edges[1], edge(1, 0, 1));
  EXPECT_EQ(g.last_node, 1);
}

TEST(SessionGraph, SingleClickSession) {
  const auto g = build_session_graph(make_session(4, {9}), 10);
  EXPECT_EQ(g.nodes, (std::vector<ItemId>{9}));
  EXPECT_TRUE(g.edges.empty());
  EXPECT_EQ(g.last_node, 0);
  EXPECT_EQ(g.in_degree, (std::vector<std::int32_t>{0}));
  EXPECT_EQ(g.out_degree, (std::vector<std::int32_t>{0}));
}

TEST(SessionGraph, SelfLoopsFromRepeatedItems) {
  const auto g = build_session_graph(make_session(0, {2, 2, 2}), 10);
  EXPECT_EQ(g.nodes, (std::vector<ItemId>{2}));
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0], edge(0, 0, 2));
  // self-loops contribute to both degrees
  EXPECT_EQ(g.in_degree[0], 2);
  EXPECT_EQ(g.out_degree[0], 2);
}

TEST(SessionGraph, CatalogViolation) {
  EXPECT_THROW(build_session_graph(make_session(0, {0, 10}), 10),
               gag::CatalogError);
  EXPECT_THROW(build_session_graph(make_session(0, {-1}), 10),
               gag::CatalogError);
}

TEST(SessionGraph, EmptySessionRejected) {
  EXPECT_THROW(build_session_graph(make_session(0, {}), 10),
               gag::ContractError);
}

TEST(SessionGraph, PathDegrees) {
  const auto g = build_session_graph(make_session(0, {0, 1, 2}), 10);
  const auto [in, out] = node_degrees(g);
  EXPECT_EQ(out, (std::vector<std::int32_t>{1, 1, 0}));
  EXPECT_EQ(in, (std::vector<std::int32_t>{0, 1, 1}));
}

TEST(SessionGraph, WeightedCycleDegrees) {
  // edges a->b weight 2, b->a weight 1; degrees sum incident edge weights
  const auto g = build_session_graph(make_session(0, {1, 2, 1, 2}), 10);
  const auto [in, out] = node_degrees(g);
  EXPECT_EQ(in[1], 2);   // b receives weight 2
  EXPECT_EQ(out[0], 2);  // a sends weight 2
  EXPECT_EQ(in[0], 1);
  EXPECT_EQ(out[1], 1);
}

TEST(SessionGraph, EdgeWeightMassEqualsTransitions) {
  gag::Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t len = 1 + rng.next_index(20);
    std::vector<ItemId> items;
    for (std::size_t i = 0; i < len; ++i) {
      items.push_back(static_cast<ItemId>(rng.next_index(6)));
    }
    const auto g = build_session_graph(make_session(1, items), 6);
    std::int64_t weight_sum = 0;
    for (const auto& e : g.edges) weight_sum += e.weight;
    EXPECT_EQ(weight_sum, static_cast<std::int64_t>(len) - 1);

    // degree consistency: both degree totals equal the edge-weight total
    const std::int64_t in_sum =
        std::accumulate(g.in_degree.begin(), g.in_degree.end(), std::int64_t{0});
    const std::int64_t out_sum = std::accumulate(
        g.out_degree.begin(), g.out_degree.end(), std::int64_t{0});
    EXPECT_EQ(in_sum, weight_sum);
    EXPECT_EQ(out_sum, weight_sum);

    // no duplicate ordered pairs
    for (std::size_t a = 0; a < g.edges.size(); ++a) {
      for (std::size_t b = a + 1; b < g.edges.size(); ++b) {
        EXPECT_FALSE(g.edges[a].src == g.edges[b].src &&
                     g.edges[a].dst == g.edges[b].dst);
      }
    }
  }
}

TEST(SessionGraph, Deterministic) {
  const auto a = build_session_graph(make_session(0, {4, 2, 4, 1}), 8);
  const auto b = build_session_graph(make_session(0, {4, 2, 4, 1}), 8);
  EXPECT_EQ(a.nodes, b.nodes);
  EXPECT_EQ(a.edges, b.edges);
  EXPECT_EQ(a.last_node, b.last_node);
}

TEST(SessionGraph, OrderSensitive) {
  const auto ab = build_session_graph(make_session(0, {0, 1}), 2);
  const auto ba = build_session_graph(make_session(0, {1, 0}), 2);
  // same item multiset, different direction
  ASSERT_EQ(ab.edges.size(), 1u);
  ASSERT_EQ(ba.edges.size(), 1u);
  EXPECT_NE(std::pair(ab.nodes[ab.edges[0].src], ab.nodes[ab.edges[0].dst]),
            std::pair(ba.nodes[ba.edges[0].src], ba.nodes[ba.edges[0].dst]));
}
