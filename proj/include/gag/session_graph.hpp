#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gag/error.hpp"
#include "gag/session.hpp"

namespace gag {

// Weighted directed graph over the unique items of one session. Nodes are in
// first-occurrence order; an edge's weight counts how many times its ordered
// item pair occurred consecutively, so edge weights sum to length - 1.
struct SessionGraph {
  struct Edge {
    std::int32_t src = 0;  // node index of the sender
    std::int32_t dst = 0;  // node index of the receiver
    std::int32_t weight = 0;

    bool operator==(const Edge&) const = default;
  };

  UserId user_id = 0;
  std::vector<ItemId> nodes;  // unique items, first-occurrence order
  std::vector<Edge> edges;
  std::int32_t last_node = 0;  // node holding the final session item
  std::vector<std::int32_t> in_degree;   // weighted, see node_degrees
  std::vector<std::int32_t> out_degree;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_edges() const { return edges.size(); }
};

// Weighted degrees: each edge contributes its weight to the sender's
// out-degree and the receiver's in-degree. Self-loops count on both sides; a
// node with no incident edges has degree 0.
inline std::pair<std::vector<std::int32_t>, std::vector<std::int32_t>>
node_degrees(const SessionGraph& graph) {
  std::vector<std::int32_t> in(graph.num_nodes(), 0);
  std::vector<std::int32_t> out(graph.num_nodes(), 0);
  for (const auto& edge : graph.edges) {
    out[edge.src] += edge.weight;
    in[edge.dst] += edge.weight;
  }
  return {std::move(in), std::move(out)};
}

inline SessionGraph build_session_graph(UserId user,
                                        std::span<const ItemId> items,
                                        std::size_t catalog_size) {
  if (items.empty()) {
    throw ContractError("build_session_graph: session has no items");
  }
  SessionGraph graph;
  graph.user_id = user;

  std::unordered_map<ItemId, std::int32_t> node_of;
  node_of.reserve(items.size());
  for (ItemId item : items) {
    if (!in_catalog(item, catalog_size)) {
      throw CatalogError("item id " + std::to_string(item) +
                         " outside catalog of size " +
                         std::to_string(catalog_size));
    }
    if (node_of.emplace(item, static_cast<std::int32_t>(graph.nodes.size()))
            .second) {
      graph.nodes.push_back(item);
    }
  }

  // Edges keyed by (src, dst); kept in first-observation order.
  std::unordered_map<std::uint64_t, std::size_t> edge_of;
  for (std::size_t n = 1; n < items.size(); ++n) {
    const std::int32_t src = node_of[items[n - 1]];
    const std::int32_t dst = node_of[items[n]];
    const std::uint64_t key =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(src)) << 32) |
        static_cast<std::uint32_t>(dst);
    auto [it, inserted] = edge_of.emplace(key, graph.edges.size());
    if (inserted) {
      graph.edges.push_back({src, dst, 1});
    } else {
      ++graph.edges[it->second].weight;
    }
  }

  graph.last_node = node_of[items.back()];
  std::tie(graph.in_degree, graph.out_degree) = node_degrees(graph);
  return graph;
}

inline SessionGraph build_session_graph(const Session& session,
                                        std::size_t catalog_size) {
  return build_session_graph(session.user_id, session.items, catalog_size);
}

}  // namespace gag
