#pragma once

#include <stdexcept>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"
#include "service.hpp"

namespace vnfp {

struct WorkloadParams {
  double fill = 0.6;  // fraction of total server capacity to occupy
  int min_len = 3, max_len = 7;
  int min_demand = 1, max_demand = 4;
  double min_rate = 50.0, max_rate = 200.0;  // packets/sec per service
};

struct Workload {
  std::vector<ServiceChain> services;
  double fill_fraction = 0.0;  // achieved (>= requested)
};

// Appends service chains (length, per-VNF demand and arrival rate drawn
// uniformly from the configured ranges) until total demand reaches the fill
// target. A demand no single server could host is redrawn.
inline Workload generate_workload(const NetworkGraph& g, const WorkloadParams& p, Rng& rng) {
  if (!(p.fill > 0.0 && p.fill <= 1.0))
    throw std::invalid_argument("generate_workload: fill target outside (0,1]");
  if (p.min_len < 1 || p.max_len < p.min_len || p.min_demand < 1 || p.max_demand < p.min_demand ||
      !(p.min_rate > 0.0) || p.max_rate < p.min_rate)
    throw std::invalid_argument("generate_workload: empty or invalid parameter range");

  int total_cap = 0, max_cap = 0;
  for (int v : g.server_nodes()) {
    total_cap += g.capacity(v);
    max_cap = std::max(max_cap, g.capacity(v));
  }
  if (p.min_demand > max_cap)
    throw std::invalid_argument("generate_workload: minimum demand exceeds every server");

  Workload w;
  int used = 0;
  while (static_cast<double>(used) < p.fill * total_cap) {
    ServiceChain s;
    const int len = rng.uniform_int(p.min_len, p.max_len);
    for (int j = 0; j < len; ++j) {
      int d = rng.uniform_int(p.min_demand, p.max_demand);
      while (d > max_cap) d = rng.uniform_int(p.min_demand, p.max_demand);
      s.vnf_demands.push_back(d);
    }
    s.arrival_rate = rng.uniform_real(p.min_rate, p.max_rate);
    used += s.total_demand();
    w.services.push_back(std::move(s));
  }
  w.fill_fraction = total_cap > 0 ? static_cast<double>(used) / total_cap : 0.0;
  return w;
}

}  // namespace vnfp
