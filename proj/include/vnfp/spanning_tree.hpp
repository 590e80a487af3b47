#pragma once

#include <algorithm>
#include <vector>

#include "vnfp/graph.hpp"

namespace vnfp {

struct SpanningTree {
  int root = 0;
  std::vector<int> parent;                       // -1 at root
  std::vector<std::vector<int>> children;        // ascending node index
  std::vector<int> depth;                        // hops from root
  std::vector<std::vector<int>> tree_neighbors;  // parent + children, ascending

  int node_count() const { return static_cast<int>(parent.size()); }

  int tree_edge_count() const { return node_count() - 1; }
};

namespace detail {

inline int farthest_node(const std::vector<int>& dist) {
  int best = 0;
  for (int v = 1; v < static_cast<int>(dist.size()); ++v)
    if (dist[v] != kUnreached && dist[v] > dist[best]) best = v;
  return best;  // lowest index among maxima
}

}  // namespace detail

// BFS spanning tree rooted at an approximately central node. The center is
// the midpoint of a double-BFS diameter path, tie-broken by lowest node
// index; rooting there keeps the tree shallow so capacity updates stay
// local.
inline SpanningTree build_spanning_tree(const NetworkGraph& g) {
  if (g.node_count() == 0) throw std::invalid_argument("empty graph");
  if (!g.connected()) throw std::invalid_argument("graph is not connected");

  auto d0 = g.bfs_distances(0);
  const int u = detail::farthest_node(d0);
  auto du = g.bfs_distances(u);
  const int v = detail::farthest_node(du);

  // Walk the u-v shortest path; take its middle node(s).
  std::vector<int> path{v};
  {
    auto dv = g.bfs_distances(v);
    int cur = v;
    while (cur != u) {
      for (int w : g.neighbors(cur)) {
        if (du[w] == du[cur] - 1 && dv[w] == dv[cur] + 1) {
          cur = w;
          break;
        }
      }
      path.push_back(cur);
    }
  }
  const int d = static_cast<int>(path.size()) - 1;
  int root = path[d / 2];
  if (d % 2 != 0) root = std::min(root, path[(d + 1) / 2]);

  SpanningTree t;
  const int n = g.node_count();
  t.root = root;
  t.parent.assign(n, -1);
  t.children.assign(n, {});
  t.depth.assign(n, -1);
  t.tree_neighbors.assign(n, {});

  std::vector<int> frontier{root};
  t.depth[root] = 0;
  while (!frontier.empty()) {
    std::vector<int> next;
    for (int a : frontier)
      for (int b : g.neighbors(a))
        if (t.depth[b] < 0) {
          t.depth[b] = t.depth[a] + 1;
          t.parent[b] = a;
          t.children[a].push_back(b);
          next.push_back(b);
        }
    frontier = std::move(next);
  }
  for (int a = 0; a < n; ++a) {
    if (t.parent[a] >= 0) t.tree_neighbors[a].push_back(t.parent[a]);
    for (int c : t.children[a]) t.tree_neighbors[a].push_back(c);
    std::sort(t.tree_neighbors[a].begin(), t.tree_neighbors[a].end());
  }
  return t;
}

}  // namespace vnfp
