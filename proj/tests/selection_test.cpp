#include "vnfp/selection.hpp"

#include <gtest/gtest.h>

#include <queue>

#include "test_util.hpp"
#include "vnfp/rng.hpp"
#include "vnfp/topology.hpp"

using vnfp::CapacityState;
using vnfp::NetworkGraph;
using vnfp::SpanningTree;
using vnfp::SpanRow;

namespace {

// Oracle: exhaustive scan over all servers by reference BFS distance.
std::optional<int> scan_nearest_ref(const NetworkGraph& g, const CapacityState& caps, int origin,
                                    int demand) {
  auto dist = testutil::bfs_ref(g, origin);
  int best = -1, bd = 0;
  for (int sid = 0; sid < g.server_count(); ++sid) {
    if (caps.remaining[sid] < demand) continue;
    int d = dist[g.server_node(sid)];
    if (best < 0 || d < bd || (d == bd && sid < best)) {
      best = sid;
      bd = d;
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

std::vector<int> tree_dist_ref(const SpanningTree& t, int src) {
  std::vector<int> dist(t.node_count(), -1);
  std::queue<int> q;
  dist[src] = 0;
  q.push(src);
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int w : t.tree_neighbors[v])
      if (dist[w] < 0) {
        dist[w] = dist[v] + 1;
        q.push(w);
      }
  }
  return dist;
}

// For each node, the first tree hop on the path from v (or -1 at v itself).
std::vector<int> first_hop_ref(const SpanningTree& t, int v) {
  std::vector<int> hop(t.node_count(), -2);
  std::queue<int> q;
  hop[v] = -1;
  q.push(v);
  while (!q.empty()) {
    int x = q.front();
    q.pop();
    for (int w : t.tree_neighbors[x])
      if (hop[w] == -2) {
        hop[w] = (x == v) ? w : hop[x];
        q.push(w);
      }
  }
  return hop;
}

// Oracle row: best (cap desc, dist asc, ID asc) server whose tree path from v
// starts with edge v-m.
SpanRow brute_row(const SpanningTree& t, const NetworkGraph& g, const CapacityState& caps, int v,
                  int m, const std::vector<int>& dist, const std::vector<int>& hop) {
  SpanRow best;
  for (int sid = 0; sid < g.server_count(); ++sid) {
    int node = g.server_node(sid);
    if (hop[node] != m) continue;
    SpanRow r{caps.remaining[sid], dist[node], sid};
    if (vnfp::row_better(r, best)) best = r;
  }
  return best;
}

CapacityState random_caps(const NetworkGraph& g, vnfp::Rng& rng) {
  CapacityState caps = CapacityState::full(g);
  for (int& r : caps.remaining) r = static_cast<int>(rng.uniform_int(0, r));
  return caps;
}

class SelectionOracles : public ::testing::TestWithParam<int> {
 protected:
  NetworkGraph make_graph() const {
    switch (GetParam()) {
      case 0: return vnfp::build_fat_tree(4, 8);
      case 1: return vnfp::build_leaf_spine(2, 2, 4, 8);
      default: return vnfp::build_dcell(3, 8);
    }
  }
};

TEST_P(SelectionOracles, SimpleAndCachedMatchScan) {
  auto g = make_graph();
  auto cache = vnfp::NearestCache::build(g);
  vnfp::Rng rng(0x5e1ec7 + GetParam());
  for (int it = 0; it < 1000; ++it) {
    auto caps = random_caps(g, rng);
    int origin = static_cast<int>(rng.uniform_index(g.node_count()));
    int demand = static_cast<int>(rng.uniform_int(1, 9));  // sometimes infeasible
    auto want = scan_nearest_ref(g, caps, origin, demand);
    EXPECT_EQ(vnfp::simple_bfs_nearest(g, caps, origin, demand), want) << "it " << it;
    EXPECT_EQ(vnfp::cached_nearest(cache, caps, origin, demand), want) << "it " << it;
  }
}

TEST_P(SelectionOracles, SpanningTablesMatchBruteForce) {
  auto g = make_graph();
  auto t = vnfp::build_spanning_tree(g);
  vnfp::Rng rng(0xb1d + GetParam());
  for (int it = 0; it < 50; ++it) {
    auto caps = random_caps(g, rng);
    auto tables = vnfp::SpanningTables::build(t, g, caps);
    for (int v = 0; v < g.node_count(); ++v) {
      auto dist = tree_dist_ref(t, v);
      auto hop = first_hop_ref(t, v);
      for (int m : t.tree_neighbors[v])
        EXPECT_EQ(tables.row(t, v, m), brute_row(t, g, caps, v, m, dist, hop))
            << "it " << it << " node " << v << " edge to " << m;
      SpanRow self;
      if (g.is_server(v)) self = SpanRow{caps.remaining[g.server_id(v)], 0, g.server_id(v)};
      EXPECT_EQ(tables.self_row(t, v), self) << "node " << v;
    }
  }
}

TEST_P(SelectionOracles, IncrementalUpdateEqualsRebuild) {
  auto g = make_graph();
  auto t = vnfp::build_spanning_tree(g);
  vnfp::Rng rng(0x0bda7e + GetParam());
  for (int seq = 0; seq < 20; ++seq) {
    auto caps = random_caps(g, rng);
    auto tables = vnfp::SpanningTables::build(t, g, caps);
    for (int step = 0; step < 50; ++step) {
      int sid = static_cast<int>(rng.uniform_index(g.server_count()));
      int node = g.server_node(sid);
      caps.remaining[sid] = static_cast<int>(rng.uniform_int(0, g.capacity(node)));
      tables.update(t, node, caps.remaining[sid]);
      auto fresh = vnfp::SpanningTables::build(t, g, caps);
      ASSERT_TRUE(tables.rows_equal(fresh)) << "seq " << seq << " step " << step;
    }
  }
}

TEST_P(SelectionOracles, FeasibilityCompleteness) {
  auto g = make_graph();
  auto t = vnfp::build_spanning_tree(g);
  auto cache = vnfp::NearestCache::build(g);
  vnfp::Rng rng(0xfea51b1e + GetParam());
  for (int it = 0; it < 1200; ++it) {
    auto caps = random_caps(g, rng);
    auto tables = vnfp::SpanningTables::build(t, g, caps);
    int origin = static_cast<int>(rng.uniform_index(g.node_count()));
    int demand = static_cast<int>(rng.uniform_int(1, 10));
    bool any = false;
    for (int r : caps.remaining) any = any || r >= demand;
    EXPECT_EQ(vnfp::simple_bfs_nearest(g, caps, origin, demand).has_value(), any);
    EXPECT_EQ(vnfp::cached_nearest(cache, caps, origin, demand).has_value(), any);
    auto placed = tables.find_server(t, origin, demand);
    EXPECT_EQ(placed.has_value(), any);
    if (placed) EXPECT_GE(caps.remaining[*placed], demand);
  }
}

TEST_P(SelectionOracles, SpanningEqualsTreeNearestUnderUniformCaps) {
  auto g = make_graph();
  auto t = vnfp::build_spanning_tree(g);
  auto caps = CapacityState::full(g);  // uniform by construction (capacity 8)
  auto tables = vnfp::SpanningTables::build(t, g, caps);
  for (int origin = 0; origin < g.node_count(); ++origin) {
    auto dist = tree_dist_ref(t, origin);
    int want = -1, wd = 0;
    for (int sid = 0; sid < g.server_count(); ++sid) {
      int d = dist[g.server_node(sid)];
      if (want < 0 || d < wd || (d == wd && sid < want)) {
        want = sid;
        wd = d;
      }
    }
    auto got = tables.find_server(t, origin, 3);
    ASSERT_TRUE(got.has_value());
    EXPECT_EQ(*got, want) << "origin " << origin;
  }
}

std::string oracle_graph_name(const ::testing::TestParamInfo<int>& info) {
  switch (info.param) {
    case 0: return "FatTree";
    case 1: return "LeafSpine";
    default: return "DCell";
  }
}

INSTANTIATE_TEST_SUITE_P(Graphs, SelectionOracles, ::testing::Values(0, 1, 2), oracle_graph_name);

TEST(Selection, HandExamples) {
  // Path s0 - w - s1.
  NetworkGraph g;
  int s0 = g.add_server(5), w = g.add_switch(), s1 = g.add_server(5);
  g.add_edge(s0, w);
  g.add_edge(w, s1);

  CapacityState caps;
  caps.remaining = {0, 5};
  EXPECT_EQ(vnfp::simple_bfs_nearest(g, caps, s0, 3), 1);
  caps.remaining = {2, 5};
  EXPECT_EQ(vnfp::simple_bfs_nearest(g, caps, s0, 2), 0);  // origin itself

  auto cache = vnfp::NearestCache::build(g);
  EXPECT_EQ(cache.order(s0)[0], 0);
  EXPECT_EQ(cache.order(s1)[0], 1);
  EXPECT_EQ(cache.order(w)[0], 0);  // switch origin: nearest by ID tie-break

  // Spanning tables on the path: update s0 to 1 and watch the rows follow.
  auto t = vnfp::build_spanning_tree(g);
  caps.remaining = {5, 4};
  auto tables = vnfp::SpanningTables::build(t, g, caps);
  EXPECT_EQ(tables.row(t, w, s0), (SpanRow{5, 1, 0}));
  EXPECT_EQ(tables.row(t, w, s1), (SpanRow{4, 1, 1}));
  EXPECT_EQ(tables.row(t, s1, w), (SpanRow{5, 2, 0}));
  tables.update(t, s0, 1);
  EXPECT_EQ(tables.row(t, w, s0), (SpanRow{1, 1, 0}));
  EXPECT_EQ(tables.row(t, s1, w), (SpanRow{1, 2, 0}));
  // Fixed point: re-sending the same capacity changes nothing.
  auto before = tables;
  tables.update(t, s0, 1);
  EXPECT_TRUE(tables.rows_equal(before));

  EXPECT_THROW(tables.update(t, w, 3), std::invalid_argument);
}

TEST(Selection, StarPicksHighestCapacityAmongEqualDistance) {
  NetworkGraph g;
  int w = g.add_switch();
  int a = g.add_server(5), b = g.add_server(3), c = g.add_server(7);
  g.add_edge(w, a);
  g.add_edge(w, b);
  g.add_edge(w, c);
  auto t = vnfp::build_spanning_tree(g);
  CapacityState caps;
  caps.remaining = {5, 3, 7};
  auto tables = vnfp::SpanningTables::build(t, g, caps);
  EXPECT_EQ(tables.row(t, w, a), (SpanRow{5, 1, 0}));
  EXPECT_EQ(tables.row(t, w, b), (SpanRow{3, 1, 1}));
  EXPECT_EQ(tables.row(t, w, c), (SpanRow{7, 1, 2}));
  EXPECT_EQ(tables.find_server(t, w, 4), 2);  // ties on distance go to larger capacity
  tables.update(t, c, 5);
  EXPECT_EQ(tables.find_server(t, w, 2), 0);  // equal capacity: lower server ID
}

TEST(Selection, ContextCommitsAndExhausts) {
  auto g = vnfp::build_dcell(3, 6);
  for (auto strat : {vnfp::Strategy::Simple, vnfp::Strategy::Cached, vnfp::Strategy::Spanning}) {
    vnfp::PlacementEngine engine(g, strat);
    auto ctx = engine.make_context();
    vnfp::Rng rng(7);
    long placed_units = 0;
    const long total_units = 6L * g.server_count();
    // Keep placing demand 2 until full; every grant is feasible, and the
    // moment the pool is exhausted we must see none.
    for (;;) {
      int origin = static_cast<int>(rng.uniform_index(g.node_count()));
      auto sid = ctx.place(origin, 2);
      if (!sid) break;
      placed_units += 2;
    }
    EXPECT_EQ(placed_units, total_units) << to_string(strat);
    for (int r : ctx.caps().remaining) EXPECT_LT(r, 2);
    ctx.reset();
    EXPECT_EQ(ctx.caps().remaining[0], 6);
  }
}

TEST(Selection, FullServerNeverReturnedAgain) {
  auto g = vnfp::build_fat_tree(4, 4);
  vnfp::PlacementEngine engine(g, vnfp::Strategy::Spanning);
  auto ctx = engine.make_context();
  std::vector<int> seen;
  for (int i = 0; i < g.server_count(); ++i) {
    auto sid = ctx.place(0, 4);
    ASSERT_TRUE(sid.has_value());
    for (int s : seen) EXPECT_NE(*sid, s);
    seen.push_back(*sid);
  }
  EXPECT_FALSE(ctx.place(0, 4).has_value());
}

TEST(Selection, CacheRespectsMemoryBudget) {
  auto g = vnfp::build_fat_tree(4);
  auto need = vnfp::NearestCache::bytes_required(g);
  EXPECT_EQ(need, 36u * 16u * sizeof(int));
  try {
    vnfp::NearestCache::build(g, need - 1);
    FAIL() << "expected ResourceError";
  } catch (const vnfp::ResourceError& e) {
    EXPECT_EQ(e.required_bytes, need);
  }
  EXPECT_NO_THROW(vnfp::NearestCache::build(g, need));
}

TEST(Selection, CacheOrderInvariants) {
  auto g = vnfp::build_fat_tree(4);
  auto cache = vnfp::NearestCache::build(g);
  EXPECT_EQ(cache.list_length(), g.server_count());
  for (int sid = 0; sid < g.server_count(); ++sid) {
    int node = g.server_node(sid);
    auto dist = testutil::bfs_ref(g, node);
    const int* order = cache.order(node);
    EXPECT_EQ(order[0], sid);
    std::vector<bool> present(g.server_count(), false);
    for (int i = 0; i < cache.list_length(); ++i) {
      present[order[i]] = true;
      if (i > 0) {
        int d0 = dist[g.server_node(order[i - 1])], d1 = dist[g.server_node(order[i])];
        EXPECT_TRUE(d0 < d1 || (d0 == d1 && order[i - 1] < order[i]));
      }
    }
    EXPECT_EQ(std::count(present.begin(), present.end(), false), 0);
    // The k/2 co-located servers come first.
    EXPECT_EQ(dist[g.server_node(order[1])], 2);
  }
}

}  // namespace
