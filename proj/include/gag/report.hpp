#pragma once

#include <algorithm>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gag/detail/sha1.hpp"
#include "gag/error.hpp"
#include "gag/metrics.hpp"

namespace gag {

inline nlohmann::json chunk_report_json(const ChunkReport& report,
                                        bool include_timings = false) {
  nlohmann::json j;
  j["chunk"] = report.chunk_index;
  j["sessions"] = report.session_count;
  j["events"] = report.event_count;
  nlohmann::json recall, mrr;
  for (std::size_t ki = 0; ki < report.k_values.size(); ++ki) {
    const std::string key = std::to_string(report.k_values[ki]);
    recall[key] = report.recall[ki];
    mrr[key] = report.mrr[ki];
  }
  j["recall"] = recall;
  j["mrr"] = mrr;
  if (include_timings) j["wall_time_s"] = report.wall_time_seconds;
  return j;
}

// One JSON object per line, one line per chunk. Timings are opt-in so that
// identical runs produce byte-identical files.
inline void write_report_jsonl(std::span<const ChunkReport> reports,
                               const std::string& path,
                               bool include_timings = false) {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw DataError("cannot open " + path + " for write");
  for (const auto& report : reports) {
    out << chunk_report_json(report, include_timings).dump() << "\n";
  }
}

inline std::vector<ChunkReport> read_report_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<ChunkReport> reports;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("report parse error in " + path + ": " + e.what());
    }
    ChunkReport report;
    report.chunk_index = j.at("chunk").get<int>();
    report.session_count = j.at("sessions").get<std::size_t>();
    report.event_count = j.at("events").get<std::size_t>();
    for (const auto& [key, value] : j.at("recall").items()) {
      report.k_values.push_back(std::stoi(key));
      report.recall.push_back(value.get<double>());
      report.mrr.push_back(j.at("mrr").at(key).get<double>());
    }
    // JSON object keys arrive in lexicographic order; restore numeric order
    std::vector<std::size_t> order(report.k_values.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return report.k_values[a] < report.k_values[b];
    });
    ChunkReport sorted = report;
    for (std::size_t i = 0; i < order.size(); ++i) {
      sorted.k_values[i] = report.k_values[order[i]];
      sorted.recall[i] = report.recall[order[i]];
      sorted.mrr[i] = report.mrr[order[i]];
    }
    if (j.contains("wall_time_s")) {
      sorted.wall_time_seconds = j["wall_time_s"].get<double>();
    }
    reports.push_back(std::move(sorted));
  }
  return reports;
}

// Content hash of a file the way git names blobs.
inline std::string file_blob_sha1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  const std::string bytes{std::istreambuf_iterator<char>(in),
                          std::istreambuf_iterator<char>()};
  return detail::git_blob_sha1_hex(bytes);
}

}  // namespace gag
