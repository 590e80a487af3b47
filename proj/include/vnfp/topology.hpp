#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "vnfp/graph.hpp"

namespace vnfp {

// k-ary fat tree: k pods, (k/2)^2 core switches, k/2 aggregation and k/2
// edge switches per pod, k/2 servers per edge switch. Servers are created
// pod-major so their IDs preserve locality.
inline NetworkGraph build_fat_tree(int k, int server_capacity = 16) {
  if (k < 2 || k % 2 != 0) throw std::invalid_argument("fat tree requires even k >= 2");
  const int half = k / 2;
  NetworkGraph g;
  std::vector<std::vector<int>> pod_edge(k), pod_agg(k);
  for (int p = 0; p < k; ++p) {
    for (int e = 0; e < half; ++e) {
      int esw = g.add_switch();
      pod_edge[p].push_back(esw);
      for (int s = 0; s < half; ++s) g.add_edge(esw, g.add_server(server_capacity));
    }
    for (int a = 0; a < half; ++a) {
      int agg = g.add_switch();
      pod_agg[p].push_back(agg);
      for (int esw : pod_edge[p]) g.add_edge(agg, esw);
    }
  }
  // Core group a (size k/2) attaches to aggregation switch a of every pod.
  for (int a = 0; a < half; ++a) {
    for (int c = 0; c < half; ++c) {
      int core = g.add_switch();
      for (int p = 0; p < k; ++p) g.add_edge(core, pod_agg[p][a]);
    }
  }
  g.assign_server_ids();
  return g;
}

// Leaf-spine: every leaf connects to every spine, m servers per leaf.
inline NetworkGraph build_leaf_spine(int leaves, int spines, int servers_per_leaf,
                                     int server_capacity = 16) {
  if (leaves < 1 || spines < 1 || servers_per_leaf < 1)
    throw std::invalid_argument("leaf-spine parameters must be >= 1");
  NetworkGraph g;
  std::vector<int> leaf_nodes;
  for (int l = 0; l < leaves; ++l) {
    int leaf = g.add_switch();
    leaf_nodes.push_back(leaf);
    for (int s = 0; s < servers_per_leaf; ++s) g.add_edge(leaf, g.add_server(server_capacity));
  }
  for (int p = 0; p < spines; ++p) {
    int spine = g.add_switch();
    for (int leaf : leaf_nodes) g.add_edge(spine, leaf);
  }
  g.assign_server_ids();
  return g;
}

// Level-1 DCell over n-port cells: n+1 cells of (1 switch + n servers),
// plus one server-server link per cell pair: server j-1 of cell i connects
// to server i of cell j for i < j.
inline NetworkGraph build_dcell(int n, int server_capacity = 16) {
  if (n < 2) throw std::invalid_argument("dcell requires n >= 2");
  NetworkGraph g;
  std::vector<std::vector<int>> cell_servers(n + 1);
  for (int c = 0; c <= n; ++c) {
    int sw = g.add_switch();
    for (int s = 0; s < n; ++s) {
      int srv = g.add_server(server_capacity);
      cell_servers[c].push_back(srv);
      g.add_edge(sw, srv);
    }
  }
  for (int i = 0; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) g.add_edge(cell_servers[i][j - 1], cell_servers[j][i]);
  g.assign_server_ids();
  return g;
}

// Edge-list text format: node annotations as comments, one "u v" pair per
// line. Round-trips exactly through read_edge_list.
inline void write_edge_list(const NetworkGraph& g, std::ostream& out) {
  out << "# vnfp edge list\n";
  out << "# nodes " << g.node_count() << "\n";
  for (int v = 0; v < g.node_count(); ++v) {
    if (g.is_server(v))
      out << "# node " << v << " server " << g.capacity(v) << "\n";
    else
      out << "# node " << v << " switch\n";
  }
  for (auto [u, v] : g.edges()) out << u << " " << v << "\n";
}

inline NetworkGraph read_edge_list(std::istream& in) {
  NetworkGraph g;
  std::string line;
  int declared = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string word;
      ss >> word;
      if (word == "nodes") {
        ss >> declared;
      } else if (word == "node") {
        int idx;
        std::string kind;
        ss >> idx >> kind;
        if (idx != g.node_count()) throw std::runtime_error("edge list: nodes out of order");
        if (kind == "server") {
          int cap;
          ss >> cap;
          g.add_server(cap);
        } else if (kind == "switch") {
          g.add_switch();
        } else {
          throw std::runtime_error("edge list: unknown node kind '" + kind + "'");
        }
      }
      continue;
    }
    std::istringstream ss(line);
    int u, v;
    if (!(ss >> u >> v)) throw std::runtime_error("edge list: bad edge line '" + line + "'");
    g.add_edge(u, v);
  }
  if (declared >= 0 && declared != g.node_count())
    throw std::runtime_error("edge list: node count mismatch");
  g.assign_server_ids();
  return g;
}

}  // namespace vnfp
