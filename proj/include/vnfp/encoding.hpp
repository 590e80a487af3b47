#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "objectives.hpp"
#include "rng.hpp"
#include "selection.hpp"

namespace vnfp {

// ---------------------------------------------------------------------------
// Genotypes
// ---------------------------------------------------------------------------

// Fixed-length-string form: origins[v] lists the services whose first VNF
// starts at server v. Every service ID appears exactly once across the lists.
struct FLSGenotype {
  std::vector<std::vector<int>> origins;

  int server_count() const { return static_cast<int>(origins.size()); }
  int service_count() const {
    int n = 0;
    for (const auto& list : origins) n += static_cast<int>(list.size());
    return n;
  }
  bool operator==(const FLSGenotype&) const = default;
};

struct VLSGene {
  int service = 0;
  int server = 0;
  bool operator==(const VLSGene&) const = default;
};

// Variable-length (messy) form: an ordered gene sequence. Duplicate and
// missing services are legal here; decode resolves them.
struct VLSGenotype {
  std::vector<VLSGene> genes;
  bool operator==(const VLSGenotype&) const = default;
};

// Placement-led baseline: an explicit server per VNF, services in ID order.
struct PLGenotype {
  std::vector<std::vector<int>> assignment;
  bool operator==(const PLGenotype&) const = default;
};

// ---------------------------------------------------------------------------
// FLS operators
// ---------------------------------------------------------------------------

// Per-service origin lookup. Throws if the exactly-once invariant is broken.
inline std::vector<int> fls_origin_of(const FLSGenotype& g) {
  std::vector<int> origin(g.service_count(), -1);
  for (int v = 0; v < g.server_count(); ++v)
    for (int s : g.origins[v]) {
      if (s < 0 || s >= static_cast<int>(origin.size()) || origin[s] != -1)
        throw std::invalid_argument("FLS genotype violates the exactly-once invariant");
      origin[s] = v;
    }
  return origin;
}

inline FLSGenotype fls_init(Rng& rng, int num_services, int num_servers) {
  if (num_servers < 1) throw std::invalid_argument("fls_init: need at least one server");
  if (num_services < 0) throw std::invalid_argument("fls_init: negative service count");
  FLSGenotype g;
  g.origins.resize(num_servers);
  for (int s = 0; s < num_services; ++s)
    g.origins[rng.uniform_index(num_servers)].push_back(s);
  return g;
}

// Single-point crossover over server positions. A service caught on both
// sides of the cut keeps its lowest-ID-server copy; a service lost by the
// cut re-enters at the origin it held in the child's primary parent.
inline std::pair<FLSGenotype, FLSGenotype> fls_crossover(const FLSGenotype& a,
                                                         const FLSGenotype& b, Rng& rng) {
  if (a.server_count() != b.server_count() || a.service_count() != b.service_count())
    throw std::invalid_argument("fls_crossover: parents from different problem instances");
  const auto origin_a = fls_origin_of(a);
  const auto origin_b = fls_origin_of(b);
  const int ns = a.server_count();
  const int cut = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(ns) + 1));

  auto make_child = [&](const FLSGenotype& low, const FLSGenotype& high,
                        const std::vector<int>& primary) {
    FLSGenotype c;
    c.origins.resize(ns);
    for (int v = 0; v < cut; ++v) c.origins[v] = low.origins[v];
    for (int v = cut; v < ns; ++v) c.origins[v] = high.origins[v];
    std::vector<char> seen(primary.size(), 0);
    for (auto& list : c.origins) {
      std::size_t w = 0;
      for (int s : list)
        if (!seen[s]) {
          seen[s] = 1;
          list[w++] = s;
        }
      list.resize(w);
    }
    for (int s = 0; s < static_cast<int>(primary.size()); ++s)
      if (!seen[s]) c.origins[primary[s]].push_back(s);
    return c;
  };

  return {make_child(a, b, origin_a), make_child(b, a, origin_b)};
}

// Uniform mutation: each service independently moves to a fresh uniform
// origin with the given probability.
inline FLSGenotype fls_mutate(const FLSGenotype& g, Rng& rng, double rate) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("fls_mutate: rate outside [0,1]");
  const auto origin = fls_origin_of(g);
  FLSGenotype out = g;
  for (int s = 0; s < static_cast<int>(origin.size()); ++s) {
    if (!rng.bernoulli(rate)) continue;
    const int to = static_cast<int>(rng.uniform_index(out.server_count()));
    if (to == origin[s]) continue;
    auto& from = out.origins[origin[s]];
    from.erase(std::find(from.begin(), from.end(), s));
    out.origins[to].push_back(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// VLS operators
// ---------------------------------------------------------------------------

inline VLSGenotype vls_init(Rng& rng, int num_services, int num_servers) {
  if (num_services < 1) throw std::invalid_argument("vls_init: empty genotype forbidden");
  if (num_servers < 1) throw std::invalid_argument("vls_init: need at least one server");
  VLSGenotype g;
  g.genes.reserve(num_services);
  for (int s = 0; s < num_services; ++s)
    g.genes.push_back({s, static_cast<int>(rng.uniform_index(num_servers))});
  rng.shuffle(g.genes);
  return g;
}

// Cut-and-splice: independent cut points, swapped tails. Gene count is
// conserved across the pair; cuts that would leave a child empty are redrawn
// so genotypes stay non-empty.
inline std::pair<VLSGenotype, VLSGenotype> vls_messy_crossover(const VLSGenotype& a,
                                                               const VLSGenotype& b, Rng& rng) {
  if (a.genes.empty() || b.genes.empty())
    throw std::invalid_argument("vls_messy_crossover: empty parent");
  const std::size_t la = a.genes.size(), lb = b.genes.size();
  std::size_t ca, cb;
  do {
    ca = rng.uniform_index(la + 1);
    cb = rng.uniform_index(lb + 1);
  } while ((ca == 0 && cb == lb) || (cb == 0 && ca == la));

  auto splice = [](const std::vector<VLSGene>& head, std::size_t h,
                   const std::vector<VLSGene>& tail, std::size_t t) {
    VLSGenotype c;
    c.genes.assign(head.begin(), head.begin() + static_cast<std::ptrdiff_t>(h));
    c.genes.insert(c.genes.end(), tail.begin() + static_cast<std::ptrdiff_t>(t), tail.end());
    return c;
  };
  return {splice(a.genes, ca, b.genes, cb), splice(b.genes, cb, a.genes, ca)};
}

inline std::uint64_t vls_hash(const VLSGenotype& g) {
  std::uint64_t h = 0x5e4c5f9a1b3c2d17ULL;
  for (const auto& gene : g.genes)
    h = mix_seed(h, (static_cast<std::uint64_t>(static_cast<std::uint32_t>(gene.service)) << 32) |
                        static_cast<std::uint32_t>(gene.server));
  return h;
}

// First occurrence of a service wins; genes referencing unknown services or
// servers are dropped. Services the genotype never mentions draw a uniform
// origin from a stream seeded by the genotype itself, so resolution is a
// pure function of the genotype.
inline std::vector<int> vls_resolve_origins(const VLSGenotype& g, int num_services,
                                            int num_servers) {
  std::vector<int> origin(num_services, -1);
  for (const auto& gene : g.genes) {
    if (gene.service < 0 || gene.service >= num_services) continue;
    if (gene.server < 0 || gene.server >= num_servers) continue;
    if (origin[gene.service] == -1) origin[gene.service] = gene.server;
  }
  std::optional<Rng> fill;
  for (int s = 0; s < num_services; ++s) {
    if (origin[s] != -1) continue;
    if (!fill) fill.emplace(vls_hash(g));
    origin[s] = static_cast<int>(fill->uniform_index(num_servers));
  }
  return origin;
}

// ---------------------------------------------------------------------------
// Problem instance, solutions, decode
// ---------------------------------------------------------------------------

// One optimisation problem: topology + workload + model + strategy, with the
// routing tables and strategy preprocessing built once and shared by every
// decode. Decodes only read it, so parallel decodes are safe.
class ProblemInstance {
 public:
  ProblemInstance(const NetworkGraph& g, std::vector<ServiceChain> services,
                  const ModelParams& params, Strategy strategy,
                  std::uint64_t cache_budget_bytes = std::numeric_limits<std::uint64_t>::max())
      : graph_(&g),
        services_(std::move(services)),
        params_(params),
        tables_(CondensedTables::build(g)),
        engine_(g, strategy, cache_budget_bytes),
        evaluator_(g, tables_, services_, params_) {}

  ProblemInstance(const ProblemInstance&) = delete;
  ProblemInstance& operator=(const ProblemInstance&) = delete;

  const NetworkGraph& graph() const { return *graph_; }
  const std::vector<ServiceChain>& services() const { return services_; }
  int service_count() const { return static_cast<int>(services_.size()); }
  const ModelParams& params() const { return params_; }
  Strategy strategy() const { return engine_.strategy(); }
  const CondensedTables& tables() const { return tables_; }
  const PlacementEngine& engine() const { return engine_; }
  const Evaluator& evaluator() const { return evaluator_; }

 private:
  const NetworkGraph* graph_;
  std::vector<ServiceChain> services_;
  ModelParams params_;
  CondensedTables tables_;
  PlacementEngine engine_;
  Evaluator evaluator_;
};

// A decoded solution. `feasible` is false when capacity ran out mid-decode
// (or the placement-led repair failed); placements then hold whatever was
// placed before the failure and objectives are meaningless.
struct Solution {
  Placement placements;
  std::vector<std::vector<PathSet>> paths;
  ObjectiveVector objectives;
  bool feasible = false;
};

struct DecodeStep {
  int service = 0, vnf = 0;
  int origin_node = 0;  // node the nearest-server search started from
  int server = -1;      // chosen server ID, -1 when none had capacity
};
using DecodeTrace = std::vector<DecodeStep>;

namespace detail {

// Shared routing-led decode: services in ascending ID order; the first VNF
// searches from the encoded origin, each later VNF from its predecessor's
// host.
inline Solution decode_from_origins(const std::vector<int>& origin, const ProblemInstance& inst,
                                    DecodeTrace* trace) {
  const NetworkGraph& g = inst.graph();
  const auto& services = inst.services();
  Solution sol;
  sol.placements.resize(services.size());
  PlacementContext ctx = inst.engine().make_context();
  for (std::size_t i = 0; i < services.size(); ++i) {
    const ServiceChain& svc = services[i];
    auto& hosts = sol.placements[i];
    hosts.reserve(svc.vnf_demands.size());
    int from = g.server_node(origin[i]);
    for (int j = 0; j < svc.length(); ++j) {
      const auto sid = ctx.place(from, svc.vnf_demands[j]);
      if (trace) trace->push_back({static_cast<int>(i), j, from, sid ? *sid : -1});
      if (!sid) return sol;  // global capacity exhausted
      hosts.push_back(*sid);
      from = g.server_node(*sid);
    }
  }
  sol.paths.resize(services.size());
  for (std::size_t i = 0; i < services.size(); ++i)
    sol.paths[i] = service_paths(inst.tables(), sol.placements[i], inst.params().max_paths);
  sol.objectives = inst.evaluator().evaluate_with_paths(sol.placements, sol.paths);
  sol.feasible = true;
  return sol;
}

}  // namespace detail

inline Solution decode(const FLSGenotype& gt, const ProblemInstance& inst,
                       DecodeTrace* trace = nullptr) {
  if (gt.server_count() != inst.graph().server_count() ||
      gt.service_count() != inst.service_count())
    throw std::invalid_argument("decode: genotype does not match problem instance");
  return detail::decode_from_origins(fls_origin_of(gt), inst, trace);
}

inline Solution decode(const VLSGenotype& gt, const ProblemInstance& inst,
                       DecodeTrace* trace = nullptr) {
  return detail::decode_from_origins(
      vls_resolve_origins(gt, inst.service_count(), inst.graph().server_count()), inst, trace);
}

// ---------------------------------------------------------------------------
// Placement-led baseline suite
// ---------------------------------------------------------------------------

// Origins as in fls_init; the rest of each chain walks subsequent server IDs
// (wrapping), so string distance mirrors chain order.
inline PLGenotype pl_init(Rng& rng, const std::vector<ServiceChain>& services, int num_servers) {
  if (num_servers < 1) throw std::invalid_argument("pl_init: need at least one server");
  PLGenotype g;
  g.assignment.resize(services.size());
  for (std::size_t i = 0; i < services.size(); ++i) {
    const int o = static_cast<int>(rng.uniform_index(num_servers));
    auto& row = g.assignment[i];
    row.resize(services[i].vnf_demands.size());
    for (int j = 0; j < services[i].length(); ++j) row[j] = (o + j) % num_servers;
  }
  return g;
}

inline PLGenotype pl_mutate(const PLGenotype& g, Rng& rng, double rate, int num_servers) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("pl_mutate: rate outside [0,1]");
  if (num_servers < 1) throw std::invalid_argument("pl_mutate: need at least one server");
  PLGenotype out = g;
  for (auto& row : out.assignment)
    for (int& v : row)
      if (rng.bernoulli(rate)) v = static_cast<int>(rng.uniform_index(num_servers));
  return out;
}

// Single point over the flat service-major VNF string.
inline std::pair<PLGenotype, PLGenotype> pl_crossover(const PLGenotype& a, const PLGenotype& b,
                                                      Rng& rng) {
  if (a.assignment.size() != b.assignment.size())
    throw std::invalid_argument("pl_crossover: parents from different problem instances");
  std::size_t total = 0;
  for (std::size_t i = 0; i < a.assignment.size(); ++i) {
    if (a.assignment[i].size() != b.assignment[i].size())
      throw std::invalid_argument("pl_crossover: parents from different problem instances");
    total += a.assignment[i].size();
  }
  const std::size_t cut = rng.uniform_index(total + 1);
  PLGenotype c1 = a, c2 = b;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < a.assignment.size(); ++i)
    for (std::size_t j = 0; j < a.assignment[i].size(); ++j, ++pos)
      if (pos >= cut) {
        c1.assignment[i][j] = b.assignment[i][j];
        c2.assignment[i][j] = a.assignment[i][j];
      }
  return {c1, c2};
}

// Moves VNFs off overfilled servers to the nearest server by cyclic ID
// distance (ties toward the lower ID) with room. Servers are scanned in ID
// order; within a server, VNFs are kept in (service, VNF) order until the
// committed sum exceeds capacity. Returns false when some VNF fits nowhere;
// the genotype keeps the partial repair and decode reports it infeasible.
inline bool pl_repair(PLGenotype& g, const ProblemInstance& inst) {
  const NetworkGraph& net = inst.graph();
  const int ns = net.server_count();
  const auto& services = inst.services();
  if (g.assignment.size() != services.size())
    throw std::invalid_argument("pl_repair: genotype does not match problem instance");

  std::vector<int> load(ns, 0), cap(ns);
  for (int v = 0; v < ns; ++v) cap[v] = net.capacity(net.server_node(v));
  for (std::size_t i = 0; i < services.size(); ++i)
    for (int j = 0; j < services[i].length(); ++j) load[g.assignment[i][j]] += services[i].vnf_demands[j];

  auto nearest_with_room = [&](int from, int demand) {
    int best = -1, best_dist = std::numeric_limits<int>::max();
    for (int t = 0; t < ns; ++t) {
      if (t == from || load[t] + demand > cap[t]) continue;
      const int fwd = (t - from + ns) % ns;
      const int dist = std::min(fwd, ns - fwd);
      if (dist < best_dist) {
        best = t;
        best_dist = dist;
      }
    }
    return best;
  };

  bool ok = true;
  for (int v = 0; v < ns; ++v) {
    if (load[v] <= cap[v]) continue;
    int kept = 0;
    for (std::size_t i = 0; i < services.size(); ++i)
      for (int j = 0; j < services[i].length(); ++j) {
        if (g.assignment[i][j] != v) continue;
        const int d = services[i].vnf_demands[j];
        if (kept + d <= cap[v]) {
          kept += d;
          continue;
        }
        const int target = nearest_with_room(v, d);
        if (target < 0) {
          ok = false;
          continue;
        }
        g.assignment[i][j] = target;
        load[v] -= d;
        load[target] += d;
      }
  }
  return ok;
}

// Explicit-placement decode: no nearest-server machinery, just the capacity
// check, routing, and evaluation.
inline Solution pl_decode(const PLGenotype& g, const ProblemInstance& inst) {
  const NetworkGraph& net = inst.graph();
  const auto& services = inst.services();
  if (g.assignment.size() != services.size())
    throw std::invalid_argument("pl_decode: genotype does not match problem instance");

  Solution sol;
  sol.placements = g.assignment;
  std::vector<int> load(net.server_count(), 0);
  for (std::size_t i = 0; i < services.size(); ++i) {
    if (static_cast<int>(g.assignment[i].size()) != services[i].length())
      throw std::invalid_argument("pl_decode: genotype does not match problem instance");
    for (int j = 0; j < services[i].length(); ++j) {
      const int sid = g.assignment[i][j];
      if (sid < 0 || sid >= net.server_count())
        throw std::invalid_argument("pl_decode: server ID out of range");
      load[sid] += services[i].vnf_demands[j];
    }
  }
  for (int v = 0; v < net.server_count(); ++v)
    if (load[v] > net.capacity(net.server_node(v))) return sol;  // infeasible marker

  sol.paths.resize(services.size());
  for (std::size_t i = 0; i < services.size(); ++i)
    sol.paths[i] = service_paths(inst.tables(), sol.placements[i], inst.params().max_paths);
  sol.objectives = inst.evaluator().evaluate_with_paths(sol.placements, sol.paths);
  sol.feasible = true;
  return sol;
}

// ---------------------------------------------------------------------------
// Problem bundles for the optimizer
// ---------------------------------------------------------------------------
// Uniform facade (init / crossover / mutate / decode) over the three
// encodings. decode takes the genotype by mutable reference because the
// placement-led bundle repairs it in place (Lamarckian); the routing-led
// bundles leave it untouched.

class FlsProblem {
 public:
  using Genotype = FLSGenotype;
  explicit FlsProblem(const ProblemInstance& inst) : inst_(&inst) {}

  Genotype init(Rng& rng) const {
    return fls_init(rng, inst_->service_count(), inst_->graph().server_count());
  }
  std::pair<Genotype, Genotype> crossover(const Genotype& a, const Genotype& b, Rng& rng) const {
    return fls_crossover(a, b, rng);
  }
  Genotype mutate(const Genotype& g, Rng& rng, double rate) const {
    return fls_mutate(g, rng, rate);
  }
  Solution decode(Genotype& g) const { return vnfp::decode(g, *inst_); }
  const ProblemInstance& instance() const { return *inst_; }

 private:
  const ProblemInstance* inst_;
};

class VlsProblem {
 public:
  using Genotype = VLSGenotype;
  explicit VlsProblem(const ProblemInstance& inst) : inst_(&inst) {}

  Genotype init(Rng& rng) const {
    return vls_init(rng, inst_->service_count(), inst_->graph().server_count());
  }
  std::pair<Genotype, Genotype> crossover(const Genotype& a, const Genotype& b, Rng& rng) const {
    return vls_messy_crossover(a, b, rng);
  }
  // No mutation operator for the messy encoding: variation comes from the
  // cut-and-splice crossover alone.
  Genotype mutate(const Genotype& g, Rng&, double) const { return g; }
  Solution decode(Genotype& g) const { return vnfp::decode(g, *inst_); }
  const ProblemInstance& instance() const { return *inst_; }

 private:
  const ProblemInstance* inst_;
};

class PlProblem {
 public:
  using Genotype = PLGenotype;
  explicit PlProblem(const ProblemInstance& inst) : inst_(&inst) {}

  Genotype init(Rng& rng) const {
    return pl_init(rng, inst_->services(), inst_->graph().server_count());
  }
  std::pair<Genotype, Genotype> crossover(const Genotype& a, const Genotype& b, Rng& rng) const {
    return pl_crossover(a, b, rng);
  }
  Genotype mutate(const Genotype& g, Rng& rng, double rate) const {
    return pl_mutate(g, rng, rate, inst_->graph().server_count());
  }
  Solution decode(Genotype& g) const {
    pl_repair(g, *inst_);  // Lamarckian: the repaired string survives in the population
    return pl_decode(g, *inst_);
  }
  const ProblemInstance& instance() const { return *inst_; }

 private:
  const ProblemInstance* inst_;
};

}  // namespace vnfp
