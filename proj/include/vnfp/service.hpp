#pragma once

#include <numeric>
#include <vector>

namespace vnfp {

// An ordered chain of VNFs: each needs capacity units on its host, and the
// whole chain is entered by packets at one arrival rate.
struct ServiceChain {
  std::vector<int> vnf_demands;
  double arrival_rate = 0.0;

  int length() const { return static_cast<int>(vnf_demands.size()); }
  int total_demand() const { return std::accumulate(vnf_demands.begin(), vnf_demands.end(), 0); }
};

// Decoded assignment: hosts[i][j] is the server ID running VNF j of service i.
using Placement = std::vector<std::vector<int>>;

}  // namespace vnfp
