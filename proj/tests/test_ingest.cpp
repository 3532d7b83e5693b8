#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "gag/ingest.hpp"

#if defined(GAG_HAS_ZLIB)
#include <zlib.h>
#endif

namespace {

namespace fs = std::filesystem;

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = fs::temp_directory_path() / name;
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  out << content;
  return path;
}

constexpr std::int64_t kHour = 3600;

}  // namespace

TEST(ParseEventLog, TabSeparatedWithHeader) {
  const auto path = write_temp("gag_events_tab.tsv",
                               "user\titem\ttimestamp\n"
                               "alice\tsong1\t100\n"
                               "alice\tsong2\t200\n");
  const auto records = gag::parse_event_log(path);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].user, "alice");
  EXPECT_EQ(records[0].item, "song1");
  EXPECT_EQ(records[0].timestamp, 100);
  fs::remove(path);
}

TEST(ParseEventLog, CommaSeparated) {
  const auto path =
      write_temp("gag_events_csv.csv", "bob,x,5\nbob,y,10\n");
  const auto records = gag::parse_event_log(path);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[1].item, "y");
  fs::remove(path);
}

TEST(ParseEventLog, MalformedLineNamesLineNumber) {
  const auto path = write_temp("gag_events_bad.tsv",
                               "a\tx\t1\n"
                               "a\tx\n"
                               "a\ty\t3\n");
  try {
    gag::parse_event_log(path);
    FAIL() << "expected DataError";
  } catch (const gag::DataError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos)
        << e.what();
  }
  fs::remove(path);
}

TEST(ParseEventLog, BadTimestampRejected) {
  const auto path =
      write_temp("gag_events_badts.tsv", "a\tx\t1\na\ty\tnotanumber\n");
  EXPECT_THROW(gag::parse_event_log(path), gag::DataError);
  fs::remove(path);
}

TEST(ParseEventLog, NegativeTimestampRejected) {
  const auto path = write_temp("gag_events_negts.tsv", "a\tx\t-5\n");
  EXPECT_THROW(gag::parse_event_log(path), gag::DataError);
  fs::remove(path);
}

#if defined(GAG_HAS_ZLIB)
TEST(ParseEventLog, GzipInput) {
  const std::string path = fs::temp_directory_path() / "gag_events.tsv.gz";
  gzFile file = gzopen(path.c_str(), "wb");
  ASSERT_NE(file, nullptr);
  const std::string content = "a\tx\t1\na\ty\t2\n";
  gzwrite(file, content.data(), static_cast<unsigned>(content.size()));
  gzclose(file);
  const auto records = gag::parse_event_log(path);
  EXPECT_EQ(records.size(), 2u);
  fs::remove(path);
}
#endif

TEST(Sessionize, GapRuleSplitsAndLengthFilterDrops) {
  // events at 0h, 1h, 10h with an 8h gap: [e0, e1] kept, singleton dropped
  std::vector<gag::EventRecord> records{
      {"u", "a", 0}, {"u", "b", 1 * kHour}, {"u", "c", 10 * kHour}};
  const auto corpus = gag::sessionize(records, 8 * kHour, 100);
  ASSERT_EQ(corpus.sessions.size(), 1u);
  EXPECT_EQ(corpus.sessions[0].items.size(), 2u);
}

TEST(Sessionize, LongSessionDropped) {
  std::vector<gag::EventRecord> records;
  for (int i = 0; i < 25; ++i) {
    records.push_back({"u", "item" + std::to_string(i), i * 60});
  }
  // a second user keeps the corpus non-empty
  records.push_back({"v", "a", 0});
  records.push_back({"v", "b", 60});
  const auto corpus = gag::sessionize(records, 8 * kHour, 100);
  ASSERT_EQ(corpus.sessions.size(), 1u);
  EXPECT_EQ(corpus.user_vocab[corpus.sessions[0].user_id], "v");
}

TEST(Sessionize, TopNFilterKeepsMostFrequent) {
  std::vector<gag::EventRecord> records{
      {"u", "hot", 0},   {"u", "hot", 60},  {"u", "cold", 120},
      {"u", "hot", 180}, {"v", "hot", 0},   {"v", "hot", 60},
  };
  const auto corpus = gag::sessionize(records, kHour, 1);
  EXPECT_EQ(corpus.item_vocab, std::vector<std::string>{"hot"});
  for (const auto& s : corpus.sessions) {
    for (gag::ItemId item : s.items) EXPECT_EQ(item, 0);
  }
}

TEST(Sessionize, EmptyInputRejected) {
  EXPECT_THROW(gag::sessionize({}, kHour, 10), gag::DataError);
}

TEST(Sessionize, AllFilteredRejected) {
  std::vector<gag::EventRecord> records{{"u", "a", 0}};  // length-1 session
  EXPECT_THROW(gag::sessionize(records, kHour, 10), gag::DataError);
}

TEST(Sessionize, UnsortedTimestampsAreSortedPerUser) {
  std::vector<gag::EventRecord> records{
      {"u", "b", 120}, {"u", "a", 0}, {"u", "c", 240}};
  const auto corpus = gag::sessionize(records, kHour, 10);
  ASSERT_EQ(corpus.sessions.size(), 1u);
  // first-appearance vocab over the sorted order: a=0, b=1, c=2
  EXPECT_EQ(corpus.item_vocab,
            (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(corpus.sessions[0].items, (std::vector<gag::ItemId>{0, 1, 2}));
}

TEST(Sessionize, SessionsOrderedByEndTimestamp) {
  std::vector<gag::EventRecord> records{
      {"late", "a", 100 * kHour}, {"late", "b", 101 * kHour},
      {"early", "c", 0},          {"early", "d", kHour},
  };
  const auto corpus = gag::sessionize(records, 8 * kHour, 10);
  ASSERT_EQ(corpus.sessions.size(), 2u);
  EXPECT_LT(corpus.sessions[0].end_ts, corpus.sessions[1].end_ts);
  EXPECT_EQ(corpus.sessions[0].arrival_index, 0u);
  EXPECT_EQ(corpus.sessions[1].arrival_index, 1u);
  EXPECT_EQ(corpus.user_vocab[corpus.sessions[0].user_id], "early");
}

TEST(Sessionize, VocabIdsAreDense) {
  std::vector<gag::EventRecord> records{
      {"u", "x", 0},     {"u", "y", 60},     {"v", "y", 0},
      {"v", "z", 60},    {"w", "z", 100000}, {"w", "x", 100060},
  };
  const auto corpus = gag::sessionize(records, kHour, 10);
  for (const auto& s : corpus.sessions) {
    EXPECT_LT(static_cast<std::size_t>(s.user_id), corpus.num_users());
    for (gag::ItemId item : s.items) {
      EXPECT_LT(static_cast<std::size_t>(item), corpus.num_items());
    }
  }
}

TEST(Corpus, SaveLoadRoundTripsAndIsByteStable) {
  std::vector<gag::EventRecord> records{
      {"u", "a", 0},    {"u", "b", 60},   {"v", "b", 0},
      {"v", "c", 60},   {"u", "c", 7200}, {"u", "a", 7260},
  };
  const auto corpus = gag::sessionize(records, kHour, 10);
  const std::string path =
      fs::temp_directory_path() / "gag_corpus_roundtrip.jsonl";
  gag::save_corpus(corpus, path);
  const auto loaded = gag::load_corpus(path);
  EXPECT_EQ(loaded.item_vocab, corpus.item_vocab);
  EXPECT_EQ(loaded.user_vocab, corpus.user_vocab);
  ASSERT_EQ(loaded.sessions.size(), corpus.sessions.size());
  for (std::size_t i = 0; i < corpus.sessions.size(); ++i) {
    EXPECT_EQ(loaded.sessions[i].items, corpus.sessions[i].items);
    EXPECT_EQ(loaded.sessions[i].user_id, corpus.sessions[i].user_id);
  }

  std::ifstream first(path, std::ios::binary);
  const std::string bytes1{std::istreambuf_iterator<char>(first),
                           std::istreambuf_iterator<char>()};
  gag::save_corpus(corpus, path);
  std::ifstream second(path, std::ios::binary);
  const std::string bytes2{std::istreambuf_iterator<char>(second),
                           std::istreambuf_iterator<char>()};
  EXPECT_EQ(bytes1, bytes2);
  fs::remove(path);
}

TEST(Corpus, LoadRejectsOutOfRangeLengths) {
  const auto path = write_temp(
      "gag_corpus_bad.jsonl",
      "{\"format\":\"gag-corpus\",\"version\":1,\"items\":[\"a\"],"
      "\"users\":[\"u\"]}\n"
      "{\"u\":0,\"i\":[0],\"t\":0,\"end\":0}\n");
  EXPECT_THROW(gag::load_corpus(path), gag::DataError);
  fs::remove(path);
}
