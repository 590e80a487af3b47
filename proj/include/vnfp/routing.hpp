#pragma once

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "vnfp/graph.hpp"

namespace vnfp {

// Inclusive server-ID interval.
struct IdRange {
  int lo = 0;
  int hi = 0;
  bool operator==(const IdRange&) const = default;
};

// One set of equal-length paths between two nodes with ECMP split fractions.
// Weights are the product of 1/(next-hop count) at each hop; they sum to 1
// unless the enumeration cap bound, in which case they are renormalized.
struct PathSet {
  std::vector<std::vector<int>> paths;
  std::vector<double> weights;

  int hop_count() const { return paths.empty() ? 0 : static_cast<int>(paths[0].size()) - 1; }
};

// Per-node ECMP next-hop tables, condensed: for each incident edge, the
// sorted disjoint ranges of destination server IDs whose shortest paths may
// leave through it. A destination reachable over several equal-cost edges
// appears in each of their range sets.
class CondensedTables {
 public:
  static constexpr int kDefaultMaxPaths = 64;

  static CondensedTables build(const NetworkGraph& g) {
    CondensedTables t;
    t.graph_ = &g;
    const int n = g.node_count();
    t.slot_offset_.assign(n + 1, 0);
    for (int v = 0; v < n; ++v)
      t.slot_offset_[v + 1] = t.slot_offset_[v] + static_cast<int>(g.neighbors(v).size());
    t.ranges_.assign(t.slot_offset_[n], {});

    std::vector<int> dist(n);
    std::vector<int> frontier, next;
    // Destinations ascend, so per-slot ranges grow in sorted order and
    // adjacent IDs merge on the fly.
    for (int sid = 0; sid < g.server_count(); ++sid) {
      const int target = g.server_node(sid);
      std::fill(dist.begin(), dist.end(), -1);
      dist[target] = 0;
      frontier.assign(1, target);
      while (!frontier.empty()) {
        next.clear();
        for (int v : frontier)
          for (int w : g.neighbors(v))
            if (dist[w] < 0) {
              dist[w] = dist[v] + 1;
              next.push_back(w);
            }
        std::swap(frontier, next);
      }
      for (int v = 0; v < n; ++v) {
        if (v == target) continue;
        const auto& nb = g.neighbors(v);
        for (int i = 0; i < static_cast<int>(nb.size()); ++i) {
          if (dist[nb[i]] != dist[v] - 1) continue;
          auto& rs = t.ranges_[t.slot_offset_[v] + i];
          if (!rs.empty() && rs.back().hi == sid - 1)
            rs.back().hi = sid;
          else
            rs.push_back({sid, sid});
        }
      }
    }
    return t;
  }

  const NetworkGraph& graph() const { return *graph_; }

  const std::vector<IdRange>& edge_ranges(int node, int slot) const {
    return ranges_[slot_offset_[node] + slot];
  }

  bool edge_covers(int node, int slot, int sid) const {
    const auto& rs = ranges_[slot_offset_[node] + slot];
    auto it = std::upper_bound(rs.begin(), rs.end(), sid,
                               [](int s, const IdRange& r) { return s < r.lo; });
    return it != rs.begin() && sid <= std::prev(it)->hi;
  }

  PathSet enumerate_paths(int src, int dst, int max_paths = kDefaultMaxPaths) const {
    const NetworkGraph& g = *graph_;
    if (!g.is_server(dst)) throw std::invalid_argument("path destination must be a server");
    const int sid = g.server_id(dst);
    PathSet out;
    std::vector<int> stack{src};
    double total = 0.0;
    bool capped = false;
    dfs(src, dst, sid, 1.0, max_paths, stack, out, total, capped);
    if (capped && total > 0.0)
      for (double& w : out.weights) w /= total;
    return out;
  }

  void dump_node(int node, std::ostream& os) const {
    const auto& nb = graph_->neighbors(node);
    for (int i = 0; i < static_cast<int>(nb.size()); ++i) {
      os << node << "-" << nb[i] << " ->";
      const auto& rs = ranges_[slot_offset_[node] + i];
      if (rs.empty()) os << " (none)";
      for (std::size_t j = 0; j < rs.size(); ++j)
        os << (j ? "," : " ") << "[" << rs[j].lo << ".." << rs[j].hi << "]";
      os << "\n";
    }
  }

 private:
  void dfs(int v, int dst, int sid, double weight, int max_paths, std::vector<int>& stack,
           PathSet& out, double& total, bool& capped) const {
    if (v == dst) {
      out.paths.push_back(stack);
      out.weights.push_back(weight);
      total += weight;
      return;
    }
    const auto& nb = graph_->neighbors(v);
    int branches = 0;
    for (int i = 0; i < static_cast<int>(nb.size()); ++i)
      if (edge_covers(v, i, sid)) ++branches;
    if (branches == 0) throw std::logic_error("routing tables have no next hop toward a server");
    const double share = weight / branches;
    for (int i = 0; i < static_cast<int>(nb.size()); ++i) {
      if (!edge_covers(v, i, sid)) continue;
      if (static_cast<int>(out.paths.size()) >= max_paths) {
        capped = true;
        return;
      }
      stack.push_back(nb[i]);
      dfs(nb[i], dst, sid, share, max_paths, stack, out, total, capped);
      stack.pop_back();
    }
  }

  const NetworkGraph* graph_ = nullptr;
  std::vector<int> slot_offset_;
  std::vector<std::vector<IdRange>> ranges_;
};

// Paths between consecutive hosts of one placed chain, in chain order.
// hosts are server IDs; co-located neighbors give a zero-length PathSet.
inline std::vector<PathSet> service_paths(const CondensedTables& tables,
                                          const std::vector<int>& hosts,
                                          int max_paths = CondensedTables::kDefaultMaxPaths) {
  const NetworkGraph& g = tables.graph();
  std::vector<PathSet> out;
  out.reserve(hosts.empty() ? 0 : hosts.size() - 1);
  for (std::size_t i = 0; i + 1 < hosts.size(); ++i)
    out.push_back(
        tables.enumerate_paths(g.server_node(hosts[i]), g.server_node(hosts[i + 1]), max_paths));
  return out;
}

}  // namespace vnfp
