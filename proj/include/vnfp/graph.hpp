#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vnfp {

enum class NodeKind { Server, Switch };

struct Node {
  NodeKind kind;
  int capacity;  // capacity units; 0 for switches
};

constexpr int kUnreached = std::numeric_limits<int>::max();

// Undirected network graph over servers and switches. Nodes are indexed in
// construction order; server IDs are a dense 0-based relabeling of the
// server nodes in node-index order, so adjacent IDs stay topologically near
// for the generators in topology.hpp.
class NetworkGraph {
 public:
  int add_server(int capacity) {
    if (capacity <= 0) throw std::invalid_argument("server capacity must be positive");
    nodes_.push_back(Node{NodeKind::Server, capacity});
    adjacency_.emplace_back();
    server_id_dirty_ = true;
    return static_cast<int>(nodes_.size()) - 1;
  }

  int add_switch() {
    nodes_.push_back(Node{NodeKind::Switch, 0});
    adjacency_.emplace_back();
    return static_cast<int>(nodes_.size()) - 1;
  }

  void add_edge(int u, int v) {
    if (u == v) throw std::invalid_argument("self loop");
    if (u < 0 || v < 0 || u >= node_count() || v >= node_count())
      throw std::invalid_argument("edge endpoint out of range");
    if (u > v) std::swap(u, v);
    edges_.emplace_back(u, v);
    adjacency_[u].push_back(v);
    adjacency_[v].push_back(u);
    adjacency_sorted_ = false;
  }

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  int server_count() const {
    refresh_server_ids();
    return static_cast<int>(server_nodes_.size());
  }

  NodeKind kind(int v) const { return nodes_[v].kind; }
  bool is_server(int v) const { return nodes_[v].kind == NodeKind::Server; }
  int capacity(int v) const { return nodes_[v].capacity; }

  // Dense server ID for a server node; -1 for switches.
  int server_id(int v) const {
    refresh_server_ids();
    return server_id_of_node_[v];
  }

  // Node index of a server ID.
  int server_node(int sid) const {
    refresh_server_ids();
    return server_nodes_[sid];
  }

  const std::vector<int>& server_nodes() const {
    refresh_server_ids();
    return server_nodes_;
  }

  // Neighbors in ascending node index. BFS over this order is the canonical
  // deterministic traversal used throughout.
  const std::vector<int>& neighbors(int v) const {
    sort_adjacency();
    return adjacency_[v];
  }

  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  // Re-derives server IDs from node order. Idempotent.
  void assign_server_ids() const { refresh_server_ids(true); }

  // Hop distances from src; kUnreached where disconnected.
  std::vector<int> bfs_distances(int src) const {
    sort_adjacency();
    std::vector<int> dist(nodes_.size(), kUnreached);
    std::vector<int> frontier{src};
    dist[src] = 0;
    int d = 0;
    while (!frontier.empty()) {
      std::vector<int> next;
      for (int v : frontier)
        for (int w : adjacency_[v])
          if (dist[w] == kUnreached) {
            dist[w] = d + 1;
            next.push_back(w);
          }
      frontier = std::move(next);
      ++d;
    }
    return dist;
  }

  bool connected() const {
    if (nodes_.empty()) return true;
    auto dist = bfs_distances(0);
    return std::none_of(dist.begin(), dist.end(), [](int d) { return d == kUnreached; });
  }

  // Structural invariants: connectivity, no duplicate edges, kind/capacity
  // consistency. Throws std::runtime_error on violation.
  void validate() const {
    std::set<std::pair<int, int>> seen;
    for (auto [u, v] : edges_) {
      if (!seen.insert({u, v}).second) throw std::runtime_error("duplicate edge");
    }
    for (const Node& n : nodes_) {
      if (n.kind == NodeKind::Switch && n.capacity != 0)
        throw std::runtime_error("switch with nonzero capacity");
      if (n.kind == NodeKind::Server && n.capacity <= 0)
        throw std::runtime_error("server with non-positive capacity");
    }
    if (!connected()) throw std::runtime_error("graph is not connected");
  }

 private:
  void sort_adjacency() const {
    if (adjacency_sorted_) return;
    for (auto& a : adjacency_) std::sort(a.begin(), a.end());
    adjacency_sorted_ = true;
  }

  void refresh_server_ids(bool force = false) const {
    if (!server_id_dirty_ && !force) return;
    server_id_of_node_.assign(nodes_.size(), -1);
    server_nodes_.clear();
    for (int v = 0; v < static_cast<int>(nodes_.size()); ++v) {
      if (nodes_[v].kind == NodeKind::Server) {
        server_id_of_node_[v] = static_cast<int>(server_nodes_.size());
        server_nodes_.push_back(v);
      }
    }
    server_id_dirty_ = false;
  }

  std::vector<Node> nodes_;
  std::vector<std::pair<int, int>> edges_;
  mutable std::vector<std::vector<int>> adjacency_;
  mutable std::vector<int> server_id_of_node_;
  mutable std::vector<int> server_nodes_;
  mutable bool adjacency_sorted_ = true;
  mutable bool server_id_dirty_ = true;
};

}  // namespace vnfp
