#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#if defined(GAG_HAS_ZLIB)
#include <zlib.h>
#endif

#include "gag/error.hpp"
#include "gag/session.hpp"

namespace gag {

// One raw interaction from an event log.
struct EventRecord {
  std::string user;
  std::string item;
  std::int64_t timestamp = 0;  // seconds since epoch

  bool operator==(const EventRecord&) const = default;
};

// Preprocessed dataset: sessions in chronological order (by end timestamp)
// with dense vocabularies built in first-appearance order, so ids seen during
// the training prefix occupy a contiguous range starting at zero.
struct Corpus {
  std::vector<Session> sessions;
  std::vector<std::string> item_vocab;  // id -> original label
  std::vector<std::string> user_vocab;

  std::size_t num_items() const { return item_vocab.size(); }
  std::size_t num_users() const { return user_vocab.size(); }
};

namespace detail {

inline std::string read_file_text(const std::string& path) {
  if (path.size() > 3 && path.ends_with(".gz")) {
#if defined(GAG_HAS_ZLIB)
    gzFile file = gzopen(path.c_str(), "rb");
    if (file == nullptr) throw DataError("cannot open " + path);
    std::string text;
    char buffer[1 << 16];
    int got = 0;
    while ((got = gzread(file, buffer, sizeof(buffer))) > 0) {
      text.append(buffer, static_cast<std::size_t>(got));
    }
    const bool failed = got < 0;
    gzclose(file);
    if (failed) throw DataError("gzip read failed for " + path);
    return text;
#else
    throw DataError("gzip input requires zlib: " + path);
#endif
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

inline std::vector<std::string_view> split_line(std::string_view line,
                                                char delim) {
  std::vector<std::string_view> fields;
  if (delim == ' ') {
    // whitespace mode: split on runs of spaces/tabs
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
      if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
  }
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

inline bool parse_int64(std::string_view text, std::int64_t& value) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc{} && ptr == end;
}

}  // namespace detail

// Parses a three-column (user, item, unix-timestamp) event log. The field
// delimiter is detected from the first line (tab, then comma, then runs of
// whitespace); a first line whose third column is not an integer is treated
// as a header and skipped. Plain and .gz files are accepted.
inline std::vector<EventRecord> parse_event_log(const std::string& path) {
  const std::string text = detail::read_file_text(path);

  std::vector<EventRecord> records;
  char delim = '\0';
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool first_content_line = true;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (pos > text.size()) break;
      continue;
    }
    if (delim == '\0') {
      delim = line.find('\t') != std::string_view::npos   ? '\t'
              : line.find(',') != std::string_view::npos ? ','
                                                          : ' ';
    }
    const auto fields = detail::split_line(line, delim);
    std::int64_t ts = 0;
    if (first_content_line && (fields.size() != 3 ||
                               !detail::parse_int64(fields[2], ts))) {
      first_content_line = false;
      continue;  // header line
    }
    first_content_line = false;
    if (fields.size() != 3) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected 3 fields, got " +
                      std::to_string(fields.size()));
    }
    if (!detail::parse_int64(fields[2], ts)) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": bad timestamp '" + std::string(fields[2]) + "'");
    }
    if (ts < 0) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": negative timestamp");
    }
    records.push_back({std::string(fields[0]), std::string(fields[1]), ts});
  }
  return records;
}

// Turns raw events into a Corpus: keeps the top_n_items most frequent items,
// sorts each user's stream by time, cuts a new session wherever the gap
// between consecutive events exceeds session_gap_seconds, and drops sessions
// shorter than 2 or longer than 20 interactions. Sessions are ordered by end
// timestamp and vocabularies assigned in first-appearance order.
inline Corpus sessionize(const std::vector<EventRecord>& records,
                         std::int64_t session_gap_seconds,
                         std::size_t top_n_items) {
  if (session_gap_seconds <= 0) {
    throw ConfigError("session gap must be positive");
  }
  if (top_n_items == 0) throw ConfigError("top_n_items must be >= 1");
  if (records.empty()) throw DataError("no events, no sessions");

  // item frequency filter
  std::unordered_map<std::string, std::int64_t> freq;
  for (const auto& rec : records) ++freq[rec.item];
  std::vector<std::pair<std::string, std::int64_t>> ranked(freq.begin(),
                                                           freq.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (ranked.size() > top_n_items) ranked.resize(top_n_items);
  std::unordered_map<std::string, bool> kept;
  for (const auto& [item, count] : ranked) kept[item] = true;

  // group per user, keep file order for stable time sorting
  struct Ev {
    std::int64_t ts;
    std::size_t file_order;
    const std::string* item;
  };
  std::unordered_map<std::string, std::vector<Ev>> per_user;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (!kept.contains(rec.item)) continue;
    per_user[rec.user].push_back({rec.timestamp, i, &rec.item});
  }

  struct Staged {
    const std::string* user;
    std::vector<const std::string*> items;
    std::int64_t start_ts;
    std::int64_t end_ts;
  };
  std::vector<Staged> staged;
  for (auto& [user, events] : per_user) {
    std::sort(events.begin(), events.end(), [](const Ev& a, const Ev& b) {
      if (a.ts != b.ts) return a.ts < b.ts;
      return a.file_order < b.file_order;
    });
    std::vector<const std::string*> current;
    std::int64_t start_ts = 0;
    std::int64_t prev_ts = 0;
    auto flush = [&](std::int64_t end_ts) {
      if (current.size() >= 2 && current.size() <= 20) {
        staged.push_back({&user, current, start_ts, end_ts});
      }
      current.clear();
    };
    for (const auto& ev : events) {
      if (!current.empty() && ev.ts - prev_ts > session_gap_seconds) {
        flush(prev_ts);
      }
      if (current.empty()) start_ts = ev.ts;
      current.push_back(ev.item);
      prev_ts = ev.ts;
    }
    flush(prev_ts);
  }
  if (staged.empty()) throw DataError("no sessions after preprocessing");

  std::sort(staged.begin(), staged.end(), [](const Staged& a, const Staged& b) {
    if (a.end_ts != b.end_ts) return a.end_ts < b.end_ts;
    if (*a.user != *b.user) return *a.user < *b.user;
    return a.start_ts < b.start_ts;
  });

  Corpus corpus;
  std::unordered_map<std::string, ItemId> item_id;
  std::unordered_map<std::string, UserId> user_id;
  corpus.sessions.reserve(staged.size());
  for (std::size_t idx = 0; idx < staged.size(); ++idx) {
    const auto& st = staged[idx];
    auto [uit, unew] =
        user_id.emplace(*st.user, static_cast<UserId>(corpus.user_vocab.size()));
    if (unew) corpus.user_vocab.push_back(*st.user);
    Session session;
    session.user_id = uit->second;
    session.arrival_index = idx;
    session.end_ts = st.end_ts;
    session.items.reserve(st.items.size());
    for (const std::string* label : st.items) {
      auto [iit, inew] =
          item_id.emplace(*label, static_cast<ItemId>(corpus.item_vocab.size()));
      if (inew) corpus.item_vocab.push_back(*label);
      session.items.push_back(iit->second);
    }
    corpus.sessions.push_back(std::move(session));
  }
  return corpus;
}

inline Corpus ingest_events(const std::string& path,
                            std::int64_t session_gap_seconds,
                            std::size_t top_n_items) {
  return sessionize(parse_event_log(path), session_gap_seconds, top_n_items);
}

// Canonical corpus file: a JSON header line with the vocabularies, then one
// JSON line per session. Re-running on identical input is byte-identical.
inline void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for write");
  nlohmann::json header;
  header["format"] = "gag-corpus";
  header["version"] = 1;
  header["items"] = corpus.item_vocab;
  header["users"] = corpus.user_vocab;
  out << header.dump() << "\n";
  for (const auto& s : corpus.sessions) {
    nlohmann::json line;
    line["u"] = s.user_id;
    line["i"] = s.items;
    line["t"] = s.arrival_index;
    line["end"] = s.end_ts;
    out << line.dump() << "\n";
  }
}

inline Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty corpus file " + path);
  Corpus corpus;
  try {
    nlohmann::json header = nlohmann::json::parse(line);
    if (header.at("format").get<std::string>() != "gag-corpus") {
      throw DataError("not a corpus file: " + path);
    }
    corpus.item_vocab = header.at("items").get<std::vector<std::string>>();
    corpus.user_vocab = header.at("users").get<std::vector<std::string>>();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line);
      Session s;
      s.user_id = j.at("u").get<UserId>();
      s.items = j.at("i").get<std::vector<ItemId>>();
      s.arrival_index = j.at("t").get<std::size_t>();
      s.end_ts = j.at("end").get<std::int64_t>();
      if (s.items.size() < 2 || s.items.size() > 20) {
        throw DataError("corpus session length outside [2, 20] in " + path);
      }
      if (!in_catalog(s.user_id, corpus.user_vocab.size())) {
        throw DataError("corpus user id out of range in " + path);
      }
      for (ItemId item : s.items) {
        if (!in_catalog(item, corpus.item_vocab.size())) {
          throw DataError("corpus item id out of range in " + path);
        }
      }
      corpus.sessions.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("corpus parse error in " + path + ": " + e.what());
  }
  if (corpus.sessions.empty()) throw DataError("no sessions in " + path);
  return corpus;
}

}  // namespace gag
