#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "vnfp/graph.hpp"
#include "vnfp/routing.hpp"
#include "vnfp/service.hpp"

namespace vnfp {

struct ModelParams {
  double mu_switch = 10000.0;  // packets/sec at a forwarding switch
  double mu_vnf = 1000.0;      // packets/sec at a server (VNF processing)
  int buffer_k = 20;           // per-node queue capacity, packets in system
  double p_idle = 100.0;       // watts, server with zero utilization
  double p_max = 200.0;        // watts, server fully utilized
  double p_switch = 50.0;      // watts, active switch
  int max_paths = CondensedTables::kDefaultMaxPaths;
};

struct NodeMetrics {
  double wait;  // expected sojourn (queue + service) of accepted packets, sec
  double drop;  // stationary probability an arrival is turned away
};

struct ObjectiveVector {
  double latency = 0.0;  // mean over services, seconds, delivered packets
  double loss = 0.0;     // mean over services, fraction of packets lost
  double energy = 0.0;   // watts per service

  bool operator==(const ObjectiveVector&) const = default;
};

// Stationary M/M/1/K queue. Computed from normalized geometric sums (and
// their reciprocal form for rho > 1), which stay exact at rho = 1 and never
// overflow; the closed forms would cancel catastrophically near rho = 1.
inline NodeMetrics node_metrics(double lambda, double mu, int k_buffer) {
  if (!std::isfinite(lambda) || !std::isfinite(mu) || mu <= 0.0 || lambda < 0.0 || k_buffer < 1)
    throw std::invalid_argument("node_metrics: bad queue parameters");
  if (lambda == 0.0) return {1.0 / mu, 0.0};
  const double rho = lambda / mu;
  double p, mean_in_system;
  if (rho <= 1.0) {
    double s0 = 0.0, s1 = 0.0, pw = 1.0;  // sum rho^j, sum j*rho^j
    for (int j = 0; j <= k_buffer; ++j, pw *= rho) {
      s0 += pw;
      s1 += j * pw;
    }
    p = (pw / rho) / s0;  // pw/rho == rho^K
    mean_in_system = s1 / s0;
  } else {
    const double q = 1.0 / rho;
    double t0 = 0.0, t1 = 0.0, pw = 1.0;  // sums of q^i and i*q^i
    for (int i = 0; i <= k_buffer; ++i, pw *= q) {
      t0 += pw;
      t1 += i * pw;
    }
    p = 1.0 / t0;
    mean_in_system = k_buffer - t1 / t0;
  }
  const double accepted = lambda * (1.0 - p);
  return {mean_in_system / accepted, p};
}

namespace detail {

inline double node_mu(const NetworkGraph& g, int node, const ModelParams& params) {
  return g.is_server(node) ? params.mu_vnf : params.mu_switch;
}

}  // namespace detail

// Per-node arrival rates for a set of routed services. With `drop` null this
// is the raw ECMP-weighted load; with a per-node drop probability vector,
// upstream survival attenuates every downstream contribution in one pass
// along each chain (no global fixed point).
inline std::vector<double> aggregate_arrivals(const NetworkGraph& g,
                                              const std::vector<ServiceChain>& services,
                                              const Placement& placement,
                                              const std::vector<std::vector<PathSet>>& paths,
                                              const std::vector<double>* drop = nullptr) {
  std::vector<double> lambda(g.node_count(), 0.0);
  auto survive = [&](int node) { return drop ? 1.0 - (*drop)[node] : 1.0; };
  for (std::size_t i = 0; i < services.size(); ++i) {
    double a = services[i].arrival_rate;
    const auto& hosts = placement[i];
    for (std::size_t j = 0; j < hosts.size(); ++j) {
      const int host_node = g.server_node(hosts[j]);
      lambda[host_node] += a;
      a *= survive(host_node);
      if (j + 1 == hosts.size()) break;
      const PathSet& ps = paths[i][j];
      double through = 0.0;
      for (std::size_t k = 0; k < ps.paths.size(); ++k) {
        const auto& path = ps.paths[k];
        double flow = a * ps.weights[k];
        for (std::size_t u = 1; u + 1 < path.size(); ++u) {
          lambda[path[u]] += flow;
          flow *= survive(path[u]);
        }
        through += flow;
      }
      a = through;
    }
  }
  return lambda;
}

// Latency (conditioned on delivery) and loss of one placed chain, given
// final per-node metrics. Path choices are independent across segments, so
// the delivered-packet expectation decomposes per segment.
inline std::pair<double, double> service_objectives(const NetworkGraph& g,
                                                    const std::vector<int>& hosts,
                                                    const std::vector<PathSet>& seg_paths,
                                                    const std::vector<double>& wait,
                                                    const std::vector<double>& drop) {
  double latency = 0.0, survival = 1.0;
  for (std::size_t j = 0; j < hosts.size(); ++j) {
    const int host_node = g.server_node(hosts[j]);
    latency += wait[host_node];
    survival *= 1.0 - drop[host_node];
    if (j + 1 == hosts.size()) break;
    const PathSet& ps = seg_paths[j];
    double seg_surv = 0.0, seg_wait = 0.0;  // E[surv], E[surv * path wait]
    for (std::size_t k = 0; k < ps.paths.size(); ++k) {
      const auto& path = ps.paths[k];
      double surv_k = 1.0, wait_k = 0.0;
      for (std::size_t u = 1; u + 1 < path.size(); ++u) {
        surv_k *= 1.0 - drop[path[u]];
        wait_k += wait[path[u]];
      }
      seg_surv += ps.weights[k] * surv_k;
      seg_wait += ps.weights[k] * surv_k * wait_k;
    }
    if (seg_surv > 0.0) latency += seg_wait / seg_surv;
    survival *= seg_surv;
  }
  return {latency, 1.0 - survival};
}

// Total power of active nodes divided by the number of services. Servers are
// active iff they host at least one VNF (utilization = committed/capacity);
// switches iff they carry traffic.
inline double energy_per_service(const NetworkGraph& g, const std::vector<ServiceChain>& services,
                                 const Placement& placement, const std::vector<double>& lambda,
                                 const ModelParams& params) {
  if (services.empty()) return 0.0;
  std::vector<long> committed(g.server_count(), 0);
  for (std::size_t i = 0; i < services.size(); ++i)
    for (std::size_t j = 0; j < placement[i].size(); ++j)
      committed[placement[i][j]] += services[i].vnf_demands[j];
  double total = 0.0;
  for (int v = 0; v < g.node_count(); ++v) {
    if (g.is_server(v)) {
      const long used = committed[g.server_id(v)];
      if (used > 0)
        total += params.p_idle +
                 (static_cast<double>(used) / g.capacity(v)) * (params.p_max - params.p_idle);
    } else if (lambda[v] > 0.0) {
      total += params.p_switch;
    }
  }
  return total / static_cast<double>(services.size());
}

// Optional per-node evaluation trace for debugging dumps.
struct EvalTrace {
  std::vector<double> lambda, wait, drop;
};

class Evaluator {
 public:
  Evaluator(const NetworkGraph& g, const CondensedTables& tables,
            const std::vector<ServiceChain>& services, const ModelParams& params)
      : g_(&g), tables_(&tables), services_(&services), params_(params) {}

  const std::vector<ServiceChain>& services() const { return *services_; }
  const ModelParams& params() const { return params_; }

  ObjectiveVector evaluate(const Placement& placement, EvalTrace* trace = nullptr) const {
    const NetworkGraph& g = *g_;
    const auto& services = *services_;
    if (services.empty()) throw std::invalid_argument("evaluate: no services");
    if (placement.size() != services.size())
      throw std::invalid_argument("evaluate: placement/service count mismatch");
    for (std::size_t i = 0; i < services.size(); ++i) {
      if (static_cast<int>(placement[i].size()) != services[i].length())
        throw std::invalid_argument("evaluate: service has unplaced VNFs");
      for (int sid : placement[i])
        if (sid < 0 || sid >= g.server_count())
          throw std::invalid_argument("evaluate: invalid server ID");
    }

    std::vector<std::vector<PathSet>> paths(services.size());
    for (std::size_t i = 0; i < services.size(); ++i)
      paths[i] = service_paths(*tables_, placement[i], params_.max_paths);
    return evaluate_with_paths(placement, paths, trace);
  }

  // Variant for callers that already hold the per-segment path sets (decode
  // keeps them in the Solution); must correspond to the same placement.
  ObjectiveVector evaluate_with_paths(const Placement& placement,
                                      const std::vector<std::vector<PathSet>>& paths,
                                      EvalTrace* trace = nullptr) const {
    const NetworkGraph& g = *g_;
    const auto& services = *services_;
    if (services.empty()) throw std::invalid_argument("evaluate: no services");
    if (paths.size() != services.size())
      throw std::invalid_argument("evaluate: path/service count mismatch");

    // First sweep ignores drops; its blocking estimates then attenuate the
    // second sweep's arrivals.
    auto lambda0 = aggregate_arrivals(g, services, placement, paths);
    std::vector<double> drop_hat(g.node_count());
    for (int v = 0; v < g.node_count(); ++v)
      drop_hat[v] = node_metrics(lambda0[v], detail::node_mu(g, v, params_), params_.buffer_k).drop;
    auto lambda = aggregate_arrivals(g, services, placement, paths, &drop_hat);

    std::vector<double> wait(g.node_count()), drop(g.node_count());
    for (int v = 0; v < g.node_count(); ++v) {
      auto m = node_metrics(lambda[v], detail::node_mu(g, v, params_), params_.buffer_k);
      wait[v] = m.wait;
      drop[v] = m.drop;
    }

    ObjectiveVector obj;
    for (std::size_t i = 0; i < services.size(); ++i) {
      auto [lat, loss] = service_objectives(g, placement[i], paths[i], wait, drop);
      obj.latency += lat;
      obj.loss += loss;
    }
    obj.latency /= static_cast<double>(services.size());
    obj.loss /= static_cast<double>(services.size());
    obj.energy = energy_per_service(g, services, placement, lambda, params_);

    if (trace) *trace = EvalTrace{std::move(lambda), std::move(wait), std::move(drop)};
    return obj;
  }

 private:
  const NetworkGraph* g_;
  const CondensedTables* tables_;
  const std::vector<ServiceChain>* services_;
  ModelParams params_;
};

}  // namespace vnfp
