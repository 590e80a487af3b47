#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vnfp/graph.hpp"
#include "vnfp/spanning_tree.hpp"

namespace vnfp {

// Remaining capacity per server ID. Integral units, so committing demands
// never drifts.
struct CapacityState {
  std::vector<int> remaining;

  static CapacityState full(const NetworkGraph& g) {
    CapacityState c;
    c.remaining.reserve(g.server_count());
    for (int node : g.server_nodes()) c.remaining.push_back(g.capacity(node));
    return c;
  }
};

class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, std::uint64_t required)
      : std::runtime_error(what), required_bytes(required) {}
  std::uint64_t required_bytes;
};

// Epoch-stamped visited marks + frontier buffers, reusable across BFS calls
// without clearing.
class BfsScratch {
 public:
  void begin(int n) {
    if (static_cast<int>(stamp_.size()) < n) stamp_.assign(n, 0);
    if (++epoch_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      epoch_ = 1;
    }
  }
  bool visit(int v) {
    if (stamp_[v] == epoch_) return false;
    stamp_[v] = epoch_;
    return true;
  }
  std::vector<int> cur, nxt;

 private:
  std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
};

// Breadth-first search from origin, stopping at the first layer holding a
// server with enough remaining capacity; lowest server ID within the layer.
inline std::optional<int> simple_bfs_nearest(const NetworkGraph& g, const CapacityState& caps,
                                             int origin, int demand,
                                             BfsScratch* scratch = nullptr) {
  if (demand <= 0) throw std::invalid_argument("demand must be positive");
  BfsScratch local;
  if (!scratch) scratch = &local;
  scratch->begin(g.node_count());
  auto& cur = scratch->cur;
  auto& nxt = scratch->nxt;
  cur.clear();
  cur.push_back(origin);
  scratch->visit(origin);
  while (!cur.empty()) {
    int best = -1;
    for (int v : cur) {
      if (!g.is_server(v)) continue;
      int sid = g.server_id(v);
      if (caps.remaining[sid] >= demand && (best < 0 || sid < best)) best = sid;
    }
    if (best >= 0) return best;
    nxt.clear();
    for (int v : cur)
      for (int w : g.neighbors(v))
        if (scratch->visit(w)) nxt.push_back(w);
    std::swap(cur, nxt);
  }
  return std::nullopt;
}

// Per-origin list of every server sorted by (hop distance, server ID).
// Origins cover all nodes, not just servers, since a chain may continue from
// wherever its previous VNF landed.
class NearestCache {
 public:
  static std::uint64_t bytes_required(const NetworkGraph& g) {
    return static_cast<std::uint64_t>(g.node_count()) *
           static_cast<std::uint64_t>(g.server_count()) * sizeof(int);
  }

  static NearestCache build(const NetworkGraph& g,
                            std::uint64_t budget_bytes = std::numeric_limits<std::uint64_t>::max()) {
    const std::uint64_t need = bytes_required(g);
    if (need > budget_bytes)
      throw ResourceError("nearest cache needs " + std::to_string(need) + " bytes (budget " +
                              std::to_string(budget_bytes) + ")",
                          need);
    const int n = g.node_count();
    const int s = g.server_count();
    NearestCache c;
    c.servers_ = s;
    c.flat_.resize(static_cast<std::size_t>(n) * s);

    std::vector<int> dist(n);
    std::vector<int> frontier, next;
    std::vector<int> bucket_count, bucket_pos;
    for (int origin = 0; origin < n; ++origin) {
      std::fill(dist.begin(), dist.end(), -1);
      frontier.clear();
      frontier.push_back(origin);
      dist[origin] = 0;
      int d = 0, maxd = 0;
      while (!frontier.empty()) {
        next.clear();
        for (int v : frontier)
          for (int w : g.neighbors(v))
            if (dist[w] < 0) {
              dist[w] = d + 1;
              next.push_back(w);
            }
        std::swap(frontier, next);
        maxd = d++;
      }
      // Counting sort of server IDs by distance; stable, so IDs stay
      // ascending within each distance.
      bucket_count.assign(maxd + 2, 0);
      for (int sid = 0; sid < s; ++sid) ++bucket_count[dist[g.server_node(sid)]];
      bucket_pos.assign(maxd + 2, 0);
      for (int dd = 1; dd <= maxd + 1; ++dd)
        bucket_pos[dd] = bucket_pos[dd - 1] + bucket_count[dd - 1];
      int* out = c.flat_.data() + static_cast<std::size_t>(origin) * s;
      for (int sid = 0; sid < s; ++sid) out[bucket_pos[dist[g.server_node(sid)]]++] = sid;
    }
    return c;
  }

  const int* order(int node) const { return flat_.data() + static_cast<std::size_t>(node) * servers_; }
  int list_length() const { return servers_; }

 private:
  int servers_ = 0;
  std::vector<int> flat_;
};

inline std::optional<int> cached_nearest(const NearestCache& cache, const CapacityState& caps,
                                         int origin, int demand) {
  if (demand <= 0) throw std::invalid_argument("demand must be positive");
  const int* order = cache.order(origin);
  for (int i = 0; i < cache.list_length(); ++i)
    if (caps.remaining[order[i]] >= demand) return order[i];
  return std::nullopt;
}

// One table row: the best server reachable through a tree edge (or the node
// itself for the self row). "Best" is capacity descending, distance
// ascending, server ID ascending. cap < 0 marks a direction with no server.
struct SpanRow {
  int cap = -1;
  int dist = std::numeric_limits<int>::max();
  int server = std::numeric_limits<int>::max();

  bool operator==(const SpanRow&) const = default;
};

inline bool row_better(const SpanRow& a, const SpanRow& b) {
  if (a.cap != b.cap) return a.cap > b.cap;
  if (a.dist != b.dist) return a.dist < b.dist;
  return a.server < b.server;
}

// Per-node search tables over a spanning tree. Node v holds one row per
// incident tree edge (aligned with tree_neighbors[v]) plus a trailing self
// row. Built once for a capacity state, then kept consistent with
// incremental updates as placements commit.
class SpanningTables {
 public:
  static SpanningTables build(const SpanningTree& tree, const NetworkGraph& g,
                              const CapacityState& caps) {
    const int n = tree.node_count();
    SpanningTables t;
    t.offset_.resize(n + 1);
    t.sid_.resize(n);
    int total = 0;
    for (int v = 0; v < n; ++v) {
      t.offset_[v] = total;
      total += static_cast<int>(tree.tree_neighbors[v].size()) + 1;
      t.sid_[v] = g.is_server(v) ? g.server_id(v) : -1;
    }
    t.offset_[n] = total;
    t.rows_.assign(total, SpanRow{});
    // Reciprocal slots: for slot i of v pointing at m, the slot of v inside m.
    t.back_slot_.assign(total, -1);
    for (int v = 0; v < n; ++v) {
      const auto& nb = tree.tree_neighbors[v];
      for (int i = 0; i < static_cast<int>(nb.size()); ++i)
        t.back_slot_[t.offset_[v] + i] = t.slot_of(tree, nb[i], v);
    }

    // BFS ordering (parents before children).
    std::vector<int> order;
    order.reserve(n);
    order.push_back(tree.root);
    for (int i = 0; i < n; ++i)
      for (int c : tree.children[order[i]]) order.push_back(c);

    // Self rows, then best-in-subtree from the leaves up.
    for (int v = 0; v < n; ++v)
      if (t.sid_[v] >= 0) t.rows_[t.self_slot(tree, v)] = SpanRow{caps.remaining[t.sid_[v]], 0, t.sid_[v]};
    std::vector<SpanRow> down(n);
    for (int i = n - 1; i >= 0; --i) {
      const int v = order[i];
      SpanRow best = t.sid_[v] >= 0 ? t.rows_[t.self_slot(tree, v)] : SpanRow{};
      for (int c : tree.children[v]) {
        SpanRow cand = lift(down[c]);
        if (row_better(cand, best)) best = cand;
      }
      down[v] = best;
    }

    // Edge rows from the root down. Processing v writes v's rows toward its
    // children and each child's row back toward v, the latter excluding that
    // child's own subtree via a best/second-best pair.
    for (int v : order) {
      const auto& nb = tree.tree_neighbors[v];
      SpanRow best1{}, best2{};
      int best1_child = -1;
      auto offer = [&](const SpanRow& r, int from_child) {
        if (row_better(r, best1)) {
          best2 = best1;
          best1 = r;
          best1_child = from_child;
        } else if (row_better(r, best2)) {
          best2 = r;
        }
      };
      if (t.sid_[v] >= 0) offer(t.rows_[t.self_slot(tree, v)], -1);
      if (tree.parent[v] >= 0) offer(t.rows_[t.offset_[v] + t.slot_of(tree, v, tree.parent[v])], -1);
      for (int c : tree.children[v]) offer(lift(down[c]), c);

      for (int i = 0; i < static_cast<int>(nb.size()); ++i) {
        const int m = nb[i];
        if (m == tree.parent[v]) continue;
        t.rows_[t.offset_[v] + i] = lift(down[m]);
        const SpanRow& excl = (best1_child == m) ? best2 : best1;
        t.rows_[t.offset_[m] + t.back_slot_[t.offset_[v] + i]] = lift(excl);
      }
    }

    t.best1_.assign(n, -1);
    t.best2_.assign(n, -1);
    for (int v = 0; v < n; ++v) t.rescan_best(tree, v);
    return t;
  }

  // Greedy walk: take the feasible row of least distance (ties: higher
  // capacity, then lower server ID); a tree walk that never backtracks
  // cannot revisit a node. Returns the server ID, or nullopt when no row at
  // the origin can satisfy the demand.
  std::optional<int> find_server(const SpanningTree& tree, int origin, int demand) const {
    int prev = -1, cur = origin;
    for (;;) {
      const auto& nb = tree.tree_neighbors[cur];
      const int base = offset_[cur];
      int chosen = -1;  // slot; deg(cur) = self
      SpanRow chosen_row;
      auto consider = [&](int slot, const SpanRow& r) {
        if (r.cap < demand) return;
        if (chosen < 0 || r.dist < chosen_row.dist ||
            (r.dist == chosen_row.dist &&
             (r.cap > chosen_row.cap ||
              (r.cap == chosen_row.cap && r.server < chosen_row.server)))) {
          chosen = slot;
          chosen_row = r;
        }
      };
      if (sid_[cur] >= 0) consider(static_cast<int>(nb.size()), rows_[base + nb.size()]);
      for (int i = 0; i < static_cast<int>(nb.size()); ++i) {
        if (nb[i] == prev) continue;
        consider(i, rows_[base + i]);
      }
      if (chosen < 0) {
        if (cur == origin) return std::nullopt;
        throw std::logic_error("spanning tables inconsistent: walk hit a dead end");
      }
      if (chosen == static_cast<int>(nb.size())) return sid_[cur];
      prev = cur;
      cur = nb[chosen];
    }
  }

  // Corrects every row affected by one server's new remaining capacity.
  // A wave spreads outward from the server. Each node keeps the slots of its
  // best and second-best rows; a write that disturbs neither is absorbed in
  // O(1), since every value the node forwards (best row excluding the
  // receiver's edge) is then unchanged. Otherwise the node re-offers its best
  // row to each neighbor, enqueueing only where the stored value differs.
  // The result is row-for-row identical to a fresh build.
  void update(const SpanningTree& tree, int changed, int new_remaining) {
    if (changed < 0 || changed >= tree.node_count() || sid_[changed] < 0)
      throw std::invalid_argument("update target is not a server node");
    SpanRow fresh{new_remaining, 0, sid_[changed]};
    if (rows_[self_slot(tree, changed)] == fresh) return;
    wave_.clear();
    wave_.push_back({changed, static_cast<int>(tree.tree_neighbors[changed].size()), fresh});
    std::size_t head = 0;
    while (head < wave_.size()) {
      const MsgStore m = wave_[head++];
      const int base = offset_[m.node];
      SpanRow& target = rows_[base + m.slot];
      if (target == m.value) continue;
      int& b1 = best1_[m.node];
      int& b2 = best2_[m.node];
      const int ob1 = b1, ob2 = b2;
      const SpanRow old_value = target;
      bool best_moved = true;  // false when only the second-best row moved
      if (m.slot == b1) {
        const bool improved = row_better(m.value, target);
        target = m.value;
        if (!improved) rescan_best(tree, m.node);
      } else if (row_better(m.value, rows_[base + b1])) {
        target = m.value;
        b2 = b1;
        b1 = m.slot;
      } else if (m.slot == b2) {
        const bool improved = row_better(m.value, target);
        target = m.value;
        if (!improved) rescan_best(tree, m.node);  // second-best may move elsewhere
        best_moved = false;  // best row untouched and nothing else improved
      } else if (b2 >= 0 && !row_better(m.value, rows_[base + b2])) {
        target = m.value;  // below second-best: nothing this node forwards moved
        continue;
      } else {
        target = m.value;
        b2 = m.slot;
        best_moved = false;
      }
      // Tables are message-consistent, so a neighbor's stored row equals what
      // this node last forwarded; forwarding is needed exactly where the
      // outgoing value moved, decided from local rows alone. Rows at slots
      // other than m.slot are unchanged, so the pre-write view only has to
      // patch that one slot.
      auto row_before = [&](int slot) -> const SpanRow& {
        static const SpanRow none{};
        if (slot < 0) return none;
        return slot == m.slot ? old_value : rows_[base + slot];
      };
      const SpanRow old_best = row_before(ob1), old_second = row_before(ob2);
      const SpanRow new_best = rows_[base + b1];
      const SpanRow new_second = b2 >= 0 ? rows_[base + b2] : SpanRow{};
      const auto& nb = tree.tree_neighbors[m.node];
      if (!best_moved) {
        // Only the second-best changed: the sole outgoing value that can
        // differ is the one toward the best row's own edge.
        if (b1 < static_cast<int>(nb.size()) && b1 != m.slot && old_second != new_second) {
          wave_.push_back({nb[b1], back_slot_[base + b1], lift(new_second)});
        }
        continue;
      }
      for (int i = 0; i < static_cast<int>(nb.size()); ++i) {
        if (i == m.slot) continue;  // the value toward the sender cannot have changed
        const SpanRow& was = (ob1 == i) ? old_second : old_best;
        const SpanRow& now = (b1 == i) ? new_second : new_best;
        if (was != now) wave_.push_back({nb[i], back_slot_[base + i], lift(now)});
      }
    }
  }

  bool rows_equal(const SpanningTables& other) const { return rows_ == other.rows_; }

  const SpanRow& row(const SpanningTree& tree, int node, int neighbor) const {
    return rows_[offset_[node] + slot_of(tree, node, neighbor)];
  }
  const SpanRow& self_row(const SpanningTree& tree, int node) const {
    return rows_[self_slot(tree, node)];
  }

 private:
  static SpanRow lift(const SpanRow& r) {
    return r.cap < 0 ? r : SpanRow{r.cap, r.dist + 1, r.server};
  }

  int slot_of(const SpanningTree& tree, int node, int neighbor) const {
    const auto& nb = tree.tree_neighbors[node];
    return static_cast<int>(std::lower_bound(nb.begin(), nb.end(), neighbor) - nb.begin());
  }
  int self_slot(const SpanningTree& tree, int node) const {
    return offset_[node] + static_cast<int>(tree.tree_neighbors[node].size());
  }

  void rescan_best(const SpanningTree& tree, int node) {
    const int base = offset_[node];
    const int slots =
        static_cast<int>(tree.tree_neighbors[node].size()) + (sid_[node] >= 0 ? 1 : 0);
    int b1 = -1, b2 = -1;
    for (int i = 0; i < slots; ++i) {
      const SpanRow& r = rows_[base + i];
      if (b1 < 0 || row_better(r, rows_[base + b1])) {
        b2 = b1;
        b1 = i;
      } else if (b2 < 0 || row_better(r, rows_[base + b2])) {
        b2 = i;
      }
    }
    best1_[node] = b1;
    best2_[node] = b2;
  }

  struct MsgStore {
    int node;
    int slot;
    SpanRow value;
  };

  std::vector<int> offset_;
  std::vector<int> sid_;
  std::vector<int> back_slot_;
  std::vector<SpanRow> rows_;
  std::vector<int> best1_, best2_;  // per-node slots of the two best rows
  std::vector<MsgStore> wave_;
};

enum class Strategy { Simple, Cached, Spanning };

inline std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Simple: return "simple";
    case Strategy::Cached: return "cached";
    case Strategy::Spanning: return "spanning";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& s) {
  if (s == "simple") return Strategy::Simple;
  if (s == "cached") return Strategy::Cached;
  if (s == "spanning") return Strategy::Spanning;
  throw std::invalid_argument("unknown strategy '" + s + "'");
}

class PlacementContext;

// Immutable per-strategy preprocessing, shared across decodes.
class PlacementEngine {
 public:
  PlacementEngine(const NetworkGraph& g, Strategy strategy,
                  std::uint64_t cache_budget_bytes = std::numeric_limits<std::uint64_t>::max())
      : graph_(&g), strategy_(strategy) {
    switch (strategy) {
      case Strategy::Simple:
        break;
      case Strategy::Cached:
        cache_ = NearestCache::build(g, cache_budget_bytes);
        break;
      case Strategy::Spanning: {
        tree_ = build_spanning_tree(g);
        base_tables_ = SpanningTables::build(tree_, g, CapacityState::full(g));
        break;
      }
    }
  }

  const NetworkGraph& graph() const { return *graph_; }
  Strategy strategy() const { return strategy_; }
  const NearestCache& cache() const { return cache_; }
  const SpanningTree& tree() const { return tree_; }
  const SpanningTables& base_tables() const { return base_tables_; }

  PlacementContext make_context() const;

 private:
  const NetworkGraph* graph_;
  Strategy strategy_;
  NearestCache cache_;
  SpanningTree tree_;
  SpanningTables base_tables_;
};

// Mutable decode scratch: a private capacity state (plus table copy for the
// spanning strategy). place() finds a server and commits the demand.
class PlacementContext {
 public:
  explicit PlacementContext(const PlacementEngine& engine)
      : engine_(&engine), caps_(CapacityState::full(engine.graph())) {
    if (engine.strategy() == Strategy::Spanning) tables_ = engine.base_tables();
  }

  std::optional<int> place(int origin, int demand) {
    std::optional<int> found;
    switch (engine_->strategy()) {
      case Strategy::Simple:
        found = simple_bfs_nearest(engine_->graph(), caps_, origin, demand, &scratch_);
        break;
      case Strategy::Cached:
        found = cached_nearest(engine_->cache(), caps_, origin, demand);
        break;
      case Strategy::Spanning:
        found = tables_.find_server(engine_->tree(), origin, demand);
        break;
    }
    if (!found) return std::nullopt;
    int& rem = caps_.remaining[*found];
    if (rem < demand) throw std::logic_error("placement exceeds remaining capacity");
    rem -= demand;
    if (engine_->strategy() == Strategy::Spanning)
      tables_.update(engine_->tree(), engine_->graph().server_node(*found), rem);
    return found;
  }

  void reset() {
    caps_ = CapacityState::full(engine_->graph());
    if (engine_->strategy() == Strategy::Spanning) tables_ = engine_->base_tables();
  }

  const CapacityState& caps() const { return caps_; }
  const SpanningTables& tables() const { return tables_; }

 private:
  const PlacementEngine* engine_;
  CapacityState caps_;
  SpanningTables tables_;
  BfsScratch scratch_;
};

inline PlacementContext PlacementEngine::make_context() const { return PlacementContext(*this); }

}  // namespace vnfp
