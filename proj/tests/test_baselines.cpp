#include <gtest/gtest.h>

#include <vector>

#include "gag/baselines.hpp"
#include "helpers/test_util.hpp"

using gag::ItemId;
using gag::PopModel;

TEST(Pop, RanksByFrequencyThenId) {
  PopModel pop(4);
  // counts: item0 = 3, item1 = 1, item2 = 0, item3 = 3
  for (int i = 0; i < 3; ++i) pop.observe(0);
  pop.observe(1);
  for (int i = 0; i < 3; ++i) pop.observe(3);
  EXPECT_EQ(pop.topk(2), (std::vector<ItemId>{0, 3}));
  EXPECT_EQ(pop.rank_of(0), 1u);
  EXPECT_EQ(pop.rank_of(3), 2u);
  EXPECT_EQ(pop.rank_of(1), 3u);
  EXPECT_EQ(pop.rank_of(2), 4u);
}

TEST(Pop, GrowKeepsCountsAndAddsZeros) {
  PopModel pop(2);
  pop.observe(0);
  pop.grow(4);
  EXPECT_EQ(pop.counts(), (std::vector<std::int64_t>{1, 0, 0, 0}));
  EXPECT_THROW(pop.grow(2), gag::ConfigError);
}

TEST(Pop, OutOfCatalogRejected) {
  PopModel pop(2);
  EXPECT_THROW(pop.observe(2), gag::CatalogError);
  EXPECT_THROW(pop.rank_of(-1), gag::CatalogError);
}

TEST(SPop, WithinSessionFrequencyWins) {
  PopModel pop(5);
  for (int i = 0; i < 9; ++i) pop.observe(4);  // globally hottest
  const std::vector<ItemId> prefix{1, 1, 0};
  // b = item 1 appears twice, a = item 0 once
  EXPECT_EQ(gag::spop_rank(prefix, 1, pop), 1u);
  EXPECT_EQ(gag::spop_rank(prefix, 0, pop), 2u);
  // globally popular item 4 only comes after the in-session items
  EXPECT_EQ(gag::spop_rank(prefix, 4, pop), 3u);
  EXPECT_EQ(gag::spop_topk(prefix, 3, pop),
            (std::vector<ItemId>{1, 0, 4}));
}

TEST(SPop, EmptyPrefixFallsBackToPop) {
  PopModel pop(4);
  pop.observe(2);
  pop.observe(2);
  pop.observe(1);
  const std::vector<ItemId> empty;
  for (ItemId item = 0; item < 4; ++item) {
    EXPECT_EQ(gag::spop_rank(empty, item, pop), pop.rank_of(item));
  }
  EXPECT_EQ(gag::spop_topk(empty, 4, pop), pop.topk(4));
}

TEST(SPop, TieAmongSessionItemsUsesPopOrder) {
  PopModel pop(4);
  pop.observe(3);  // item 3 globally more popular than item 2
  const std::vector<ItemId> prefix{2, 3};  // both appear once
  EXPECT_EQ(gag::spop_rank(prefix, 3, pop), 1u);
  EXPECT_EQ(gag::spop_rank(prefix, 2, pop), 2u);
}

TEST(SPop, TailFilledByPopOrder) {
  PopModel pop(5);
  pop.observe(4);
  pop.observe(4);
  pop.observe(0);
  const std::vector<ItemId> prefix{2};
  // ranking: [2 | 4, 0, 1, 3]
  EXPECT_EQ(gag::spop_topk(prefix, 5, pop),
            (std::vector<ItemId>{2, 4, 0, 1, 3}));
  EXPECT_EQ(gag::spop_rank(prefix, 4, pop), 2u);
  EXPECT_EQ(gag::spop_rank(prefix, 3, pop), 5u);
}
