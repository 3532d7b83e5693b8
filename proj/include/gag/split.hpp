#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gag/error.hpp"
#include "gag/ingest.hpp"
#include "gag/session.hpp"

namespace gag {

struct ChronologicalSplit {
  std::vector<Session> train;
  std::vector<std::vector<Session>> chunks;
};

// First floor(train_frac * N) sessions form the training set; the remainder
// is cut into num_chunks contiguous equal chunks by time order, with any
// division remainder assigned to the last chunk. Sessions are tagged 0 for
// train and 1..num_chunks for their chunk.
inline ChronologicalSplit chronological_split(const Corpus& corpus,
                                              double train_frac = 0.6,
                                              std::size_t num_chunks = 5) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw ConfigError("train_frac must be in (0, 1)");
  }
  if (num_chunks == 0) throw ConfigError("num_chunks must be >= 1");
  const std::size_t total = corpus.sessions.size();
  if (total == 0) throw DataError("chronological_split: empty corpus");

  const std::size_t train_count = static_cast<std::size_t>(
      std::floor(train_frac * static_cast<double>(total)));
  const std::size_t candidates = total - train_count;
  if (candidates < num_chunks) {
    throw DataError("chronological_split: only " + std::to_string(candidates) +
                    " candidate sessions for " + std::to_string(num_chunks) +
                    " chunks");
  }

  ChronologicalSplit split;
  split.train.assign(corpus.sessions.begin(),
                     corpus.sessions.begin() +
                         static_cast<std::ptrdiff_t>(train_count));
  for (auto& s : split.train) s.chunk_tag = 0;

  const std::size_t base = candidates / num_chunks;
  std::size_t offset = train_count;
  split.chunks.resize(num_chunks);
  for (std::size_t c = 0; c < num_chunks; ++c) {
    const std::size_t size =
        (c + 1 == num_chunks) ? total - offset : base;
    split.chunks[c].assign(
        corpus.sessions.begin() + static_cast<std::ptrdiff_t>(offset),
        corpus.sessions.begin() + static_cast<std::ptrdiff_t>(offset + size));
    for (auto& s : split.chunks[c]) s.chunk_tag = static_cast<int>(c + 1);
    offset += size;
  }
  return split;
}

}  // namespace gag
