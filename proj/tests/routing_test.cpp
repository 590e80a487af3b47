#include "vnfp/routing.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "test_util.hpp"
#include "vnfp/rng.hpp"
#include "vnfp/topology.hpp"

using vnfp::CondensedTables;
using vnfp::NetworkGraph;
using vnfp::PathSet;

namespace {

// Oracle: depth-first enumeration of every simple path of exactly the
// shortest length, no routing tables involved.
void all_shortest_ref(const NetworkGraph& g, int v, int dst, int budget, std::vector<int>& stack,
                      std::vector<char>& used, std::vector<std::vector<int>>& out) {
  if (v == dst) {
    if (budget == 0) out.push_back(stack);
    return;
  }
  if (budget == 0) return;
  for (int w : g.neighbors(v)) {
    if (used[w]) continue;
    used[w] = 1;
    stack.push_back(w);
    all_shortest_ref(g, w, dst, budget - 1, stack, used, out);
    stack.pop_back();
    used[w] = 0;
  }
}

std::vector<std::vector<int>> shortest_paths_ref(const NetworkGraph& g, int src, int dst) {
  int d = testutil::dist_ref(g, src, dst);
  std::vector<int> stack{src};
  std::vector<char> used(g.node_count(), 0);
  used[src] = 1;
  std::vector<std::vector<int>> out;
  all_shortest_ref(g, src, dst, d, stack, used, out);
  return out;
}

// Oracle weight of one path under per-hop equal splitting, from raw
// distances only.
double path_weight_ref(const NetworkGraph& g, const std::vector<int>& path) {
  auto dist = testutil::bfs_ref(g, path.back());
  double w = 1.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    int v = path[i], branches = 0;
    for (int nb : g.neighbors(v))
      if (dist[nb] == dist[v] - 1) ++branches;
    w /= branches;
  }
  return w;
}

void check_pair(const NetworkGraph& g, const CondensedTables& t, int src, int dst) {
  auto got = t.enumerate_paths(src, dst);
  auto want = shortest_paths_ref(g, src, dst);
  std::set<std::vector<int>> got_set(got.paths.begin(), got.paths.end());
  std::set<std::vector<int>> want_set(want.begin(), want.end());
  ASSERT_EQ(got_set, want_set) << src << " -> " << dst;
  // Lexicographic emission order and per-hop split weights.
  EXPECT_TRUE(std::is_sorted(got.paths.begin(), got.paths.end()));
  double sum = 0.0;
  for (std::size_t i = 0; i < got.paths.size(); ++i) {
    EXPECT_NEAR(got.weights[i], path_weight_ref(g, got.paths[i]), 1e-12);
    sum += got.weights[i];
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Routing, MatchesBruteForceEnumeration) {
  struct Case {
    const char* name;
    NetworkGraph g;
  };
  std::vector<Case> cases;
  cases.push_back({"fat_tree4", vnfp::build_fat_tree(4)});
  cases.push_back({"leaf_spine", vnfp::build_leaf_spine(2, 2, 4)});
  cases.push_back({"dcell3", vnfp::build_dcell(3)});
  for (auto& c : cases) {
    auto t = CondensedTables::build(c.g);
    for (int src = 0; src < c.g.node_count(); ++src)
      for (int sid = 0; sid < c.g.server_count(); ++sid)
        check_pair(c.g, t, src, c.g.server_node(sid));
  }
}

TEST(Routing, CompressionIsLossless) {
  for (auto& g : {vnfp::build_fat_tree(4), vnfp::build_dcell(3)}) {
    auto t = CondensedTables::build(g);
    for (int sid = 0; sid < g.server_count(); ++sid) {
      auto dist = testutil::bfs_ref(g, g.server_node(sid));
      for (int v = 0; v < g.node_count(); ++v) {
        if (v == g.server_node(sid)) continue;
        const auto& nb = g.neighbors(v);
        for (int i = 0; i < static_cast<int>(nb.size()); ++i)
          EXPECT_EQ(t.edge_covers(v, i, sid), dist[nb[i]] == dist[v] - 1)
              << "node " << v << " slot " << i << " sid " << sid;
      }
    }
  }
}

TEST(Routing, RangesAreSortedDisjointMaximal) {
  auto g = vnfp::build_fat_tree(4);
  auto t = CondensedTables::build(g);
  for (int v = 0; v < g.node_count(); ++v)
    for (int i = 0; i < static_cast<int>(g.neighbors(v).size()); ++i) {
      const auto& rs = t.edge_ranges(v, i);
      for (std::size_t j = 0; j < rs.size(); ++j) {
        EXPECT_LE(rs[j].lo, rs[j].hi);
        if (j) EXPECT_GT(rs[j].lo, rs[j - 1].hi + 1);  // disjoint and merged
      }
    }
}

TEST(Routing, FatTreeInterPodSplitsFourWays) {
  auto g = vnfp::build_fat_tree(4);
  auto t = CondensedTables::build(g);
  // Servers 0 and 15 sit in different pods.
  auto ps = t.enumerate_paths(g.server_node(0), g.server_node(15));
  ASSERT_EQ(ps.paths.size(), 4u);
  for (double w : ps.weights) EXPECT_DOUBLE_EQ(w, 0.25);
  for (auto& p : ps.paths) EXPECT_EQ(p.size(), 7u);  // 6 hops
}

TEST(Routing, FourCycleSplitsEvenly) {
  NetworkGraph g;
  int a = g.add_server(1), b = g.add_switch(), c = g.add_server(1), d = g.add_switch();
  g.add_edge(a, b);
  g.add_edge(b, c);
  g.add_edge(c, d);
  g.add_edge(d, a);
  auto t = CondensedTables::build(g);
  auto ps = t.enumerate_paths(a, c);
  ASSERT_EQ(ps.paths.size(), 2u);
  EXPECT_DOUBLE_EQ(ps.weights[0], 0.5);
  EXPECT_DOUBLE_EQ(ps.weights[1], 0.5);
}

TEST(Routing, TrivialAndErrorCases) {
  NetworkGraph g;
  int s0 = g.add_server(1), w = g.add_switch(), s1 = g.add_server(1);
  g.add_edge(s0, w);
  g.add_edge(w, s1);
  auto t = CondensedTables::build(g);

  auto self = t.enumerate_paths(s0, s0);
  ASSERT_EQ(self.paths.size(), 1u);
  EXPECT_EQ(self.paths[0], std::vector<int>{s0});
  EXPECT_DOUBLE_EQ(self.weights[0], 1.0);

  // w's edge toward s1 carries exactly [1,1].
  const auto& nb = g.neighbors(w);
  int slot1 = static_cast<int>(std::find(nb.begin(), nb.end(), s1) - nb.begin());
  EXPECT_EQ(t.edge_ranges(w, slot1), (std::vector<vnfp::IdRange>{{1, 1}}));

  EXPECT_THROW(t.enumerate_paths(s0, w), std::invalid_argument);
}

TEST(Routing, LeafServerEdgesCarrySingletonRanges) {
  auto g = vnfp::build_leaf_spine(2, 2, 4);
  auto t = CondensedTables::build(g);
  for (int v = 0; v < g.node_count(); ++v) {
    if (g.is_server(v)) continue;
    const auto& nb = g.neighbors(v);
    for (int i = 0; i < static_cast<int>(nb.size()); ++i) {
      if (!g.is_server(nb[i])) continue;
      // A server-facing edge routes only to that server.
      auto rs = t.edge_ranges(v, i);
      ASSERT_EQ(rs.size(), 1u);
      EXPECT_EQ(rs[0].lo, g.server_id(nb[i]));
      EXPECT_EQ(rs[0].hi, g.server_id(nb[i]));
    }
  }
}

TEST(Routing, CapRenormalizesWeights) {
  // K stacked complete-bipartite switch layers give 2^K equal paths.
  NetworkGraph g;
  int src = g.add_server(1);
  std::vector<int> prev{src};
  const int layers = 8;
  for (int l = 0; l < layers; ++l) {
    int x = g.add_switch(), y = g.add_switch();
    for (int p : prev) {
      g.add_edge(p, x);
      g.add_edge(p, y);
    }
    prev = {x, y};
  }
  int dst = g.add_server(1);
  for (int p : prev) g.add_edge(p, dst);
  auto t = CondensedTables::build(g);
  auto full = t.enumerate_paths(src, dst, 1 << 12);
  EXPECT_EQ(full.paths.size(), 256u);
  auto capped = t.enumerate_paths(src, dst);  // default cap 64
  EXPECT_EQ(capped.paths.size(), 64u);
  double sum = 0.0;
  for (double w : capped.weights) sum += w;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Routing, ServicePathsFollowChainOrder) {
  auto g = vnfp::build_dcell(3, 8);
  auto t = CondensedTables::build(g);
  // Chain hosts s0, s1, s0: two PathSets, out and back.
  auto segs = vnfp::service_paths(t, {0, 1, 0});
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0].paths[0].front(), g.server_node(0));
  EXPECT_EQ(segs[0].paths[0].back(), g.server_node(1));
  EXPECT_EQ(segs[1].paths[0].front(), g.server_node(1));
  EXPECT_EQ(segs[1].paths[0].back(), g.server_node(0));

  // Co-located consecutive VNFs: zero-length segment.
  auto same = vnfp::service_paths(t, {2, 2});
  ASSERT_EQ(same.size(), 1u);
  EXPECT_EQ(same[0].hop_count(), 0);

  // Segment lengths equal BFS distance.
  vnfp::Rng rng(0x70476);
  for (int it = 0; it < 200; ++it) {
    std::vector<int> hosts;
    for (int i = 0; i < 4; ++i)
      hosts.push_back(static_cast<int>(rng.uniform_index(g.server_count())));
    auto ps = vnfp::service_paths(t, hosts);
    for (std::size_t i = 0; i + 1 < hosts.size(); ++i)
      EXPECT_EQ(ps[i].hop_count(),
                testutil::dist_ref(g, g.server_node(hosts[i]), g.server_node(hosts[i + 1])));
  }
}

TEST(Routing, DumpFormat) {
  NetworkGraph g;
  int s0 = g.add_server(1), w = g.add_switch(), s1 = g.add_server(1);
  g.add_edge(s0, w);
  g.add_edge(w, s1);
  auto t = CondensedTables::build(g);
  std::ostringstream os;
  t.dump_node(w, os);
  EXPECT_EQ(os.str(), "1-0 -> [0..0]\n1-2 -> [1..1]\n");
}

}  // namespace
