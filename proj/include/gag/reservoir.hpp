#pragma once

#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gag/error.hpp"
#include "gag/rng.hpp"
#include "gag/session.hpp"

namespace gag {

// Bounded uniform sample of the historical session stream. The arrival
// counter records every session ever offered, stored or not.
struct Reservoir {
  std::size_t capacity = 0;
  std::vector<Session> entries;
  std::uint64_t arrival_counter = 0;
};

inline Reservoir make_reservoir(std::size_t capacity) {
  if (capacity == 0) throw ConfigError("reservoir capacity must be >= 1");
  Reservoir r;
  r.capacity = capacity;
  r.entries.reserve(capacity);
  return r;
}

// Classic replace-with-probability capacity/t sampling: below capacity the
// session is always kept; afterwards it displaces a uniformly random entry
// with probability capacity / arrivals-so-far.
inline void maybe_store(Reservoir& reservoir, const Session& session,
                        Rng& rng) {
  if (reservoir.capacity == 0) {
    throw ConfigError("maybe_store: reservoir has zero capacity");
  }
  ++reservoir.arrival_counter;
  if (reservoir.entries.size() < reservoir.capacity) {
    reservoir.entries.push_back(session);
    return;
  }
  const double p_store = static_cast<double>(reservoir.capacity) /
                         static_cast<double>(reservoir.arrival_counter);
  if (rng.next_double() < p_store) {
    reservoir.entries[rng.next_index(reservoir.capacity)] = session;
  }
}

// Offers each new session in arrival order.
inline void advance(Reservoir& reservoir, std::span<const Session> sessions,
                    Rng& rng) {
  for (const auto& session : sessions) {
    maybe_store(reservoir, session, rng);
  }
}

// Snapshot: a JSON header line with capacity and the arrival counter, then
// one JSON line per stored session. Enables pause/resume of a stream run.
inline void save_reservoir(const Reservoir& reservoir,
                           const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("reservoir: cannot open " + path + " for write");
  nlohmann::json header;
  header["capacity"] = reservoir.capacity;
  header["arrival_counter"] = reservoir.arrival_counter;
  out << header.dump() << "\n";
  for (const auto& s : reservoir.entries) {
    nlohmann::json line;
    line["user_id"] = s.user_id;
    line["items"] = s.items;
    line["arrival_index"] = s.arrival_index;
    out << line.dump() << "\n";
  }
}

inline Reservoir load_reservoir(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("reservoir: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw DataError("reservoir: missing header line in " + path);
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("reservoir: bad header in " + path + ": " + e.what());
  }
  Reservoir r = make_reservoir(header.at("capacity").get<std::size_t>());
  r.arrival_counter = header.at("arrival_counter").get<std::uint64_t>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("reservoir: bad session line in " + path + ": " +
                      e.what());
    }
    Session s;
    s.user_id = j.at("user_id").get<UserId>();
    s.items = j.at("items").get<std::vector<ItemId>>();
    s.arrival_index = j.at("arrival_index").get<std::size_t>();
    r.entries.push_back(std::move(s));
  }
  if (r.entries.size() > r.capacity) {
    throw DataError("reservoir: more entries than capacity in " + path);
  }
  return r;
}

}  // namespace gag
