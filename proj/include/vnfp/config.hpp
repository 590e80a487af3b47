#pragma once

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "moea.hpp"
#include "objectives.hpp"
#include "selection.hpp"
#include "topology.hpp"
#include "workload.hpp"

namespace vnfp {

enum class Representation { Fls, Vls, Pl };

inline const char* to_string(Representation r) {
  switch (r) {
    case Representation::Fls: return "fls";
    case Representation::Vls: return "vls";
    case Representation::Pl: return "pl";
  }
  return "?";
}

inline Representation parse_representation(const std::string& s) {
  if (s == "fls") return Representation::Fls;
  if (s == "vls") return Representation::Vls;
  if (s == "pl" || s == "placement") return Representation::Pl;
  throw std::invalid_argument("unknown representation '" + s + "'");
}

struct TopologyConfig {
  std::string kind = "fat_tree";  // fat_tree | leaf_spine | dcell
  int k = 4;                      // fat tree arity
  int leaves = 4, spines = 2, servers_per_leaf = 8;
  int n = 4;  // dcell servers per cell
  int capacity = 16;
};

struct OptimizerConfig {
  std::vector<Algorithm> algorithms{Algorithm::Nsga2};
  std::vector<Representation> representations{Representation::Fls};
  Strategy strategy = Strategy::Spanning;
  double cache_budget_mb = 4096.0;
  int population = 100;
  int budget = 10000;
  double crossover_rate = 0.9;
  double mutation_rate = 0.0;  // 0: one expected move per genotype (1/services)
  double kappa = 0.05;
  int neighbors = 20;
  std::vector<std::uint64_t> seeds{1};
  int bench_genotypes = 1000;
};

struct OutputConfig {
  std::string dir = "results";
};

struct ExperimentConfig {
  TopologyConfig topology;
  ModelParams model;
  WorkloadParams workload;
  std::uint64_t workload_seed = 1;
  OptimizerConfig optimizer;
  OutputConfig output;
};

// Shortest decimal string that round-trips the value.
inline std::string fmt_double(double x) { return nlohmann::json(x).dump(); }

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

using IniSections = std::map<std::string, std::map<std::string, std::string>>;

// Line-oriented `key = value` sections; `#` and `;` open comments.
inline IniSections parse_ini(std::istream& in) {
  IniSections out;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto h = line.find_first_of("#;"); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      out[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty() || section.empty())
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": key outside a [section] or empty");
    if (!out[section].emplace(key, trim(line.substr(eq + 1))).second)
      throw std::invalid_argument("config: duplicate key '" + section + "." + key + "'");
  }
  return out;
}

template <class T>
T parse_number(const std::string& value, const std::string& path) {
  std::istringstream ss(value);
  T x;
  if (!(ss >> x) || !(ss >> std::ws).eof())
    throw std::invalid_argument("config: " + path + ": cannot parse '" + value + "'");
  return x;
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(value);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Seed lists accept single values and inclusive `a..b` ranges.
inline std::vector<std::uint64_t> parse_seed_list(const std::string& value,
                                                  const std::string& path) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(value)) {
    if (const auto dots = item.find(".."); dots != std::string::npos) {
      const auto lo = parse_number<std::uint64_t>(item.substr(0, dots), path);
      const auto hi = parse_number<std::uint64_t>(item.substr(dots + 2), path);
      if (hi < lo) throw std::invalid_argument("config: " + path + ": descending range");
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(parse_number<std::uint64_t>(item, path));
    }
  }
  return out;
}

}  // namespace detail

// Parses and type-checks a config stream. Unknown sections or keys are
// rejected so typos cannot silently fall back to defaults.
inline ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  for (const auto& [section, keys] : detail::parse_ini(in)) {
    for (const auto& [key, value] : keys) {
      const std::string path = section + "." + key;
      auto num = [&](auto& field) {
        field = detail::parse_number<std::decay_t<decltype(field)>>(value, path);
      };
      bool known = true;
      if (section == "topology") {
        auto& t = cfg.topology;
        if (key == "kind") t.kind = value;
        else if (key == "k") num(t.k);
        else if (key == "leaves") num(t.leaves);
        else if (key == "spines") num(t.spines);
        else if (key == "servers_per_leaf") num(t.servers_per_leaf);
        else if (key == "n") num(t.n);
        else if (key == "capacity") num(t.capacity);
        else known = false;
      } else if (section == "model") {
        auto& m = cfg.model;
        if (key == "mu_switch") num(m.mu_switch);
        else if (key == "mu_vnf") num(m.mu_vnf);
        else if (key == "buffer_k") num(m.buffer_k);
        else if (key == "p_idle") num(m.p_idle);
        else if (key == "p_max") num(m.p_max);
        else if (key == "p_switch") num(m.p_switch);
        else if (key == "max_paths") num(m.max_paths);
        else known = false;
      } else if (section == "workload") {
        auto& w = cfg.workload;
        if (key == "fill") num(w.fill);
        else if (key == "min_len") num(w.min_len);
        else if (key == "max_len") num(w.max_len);
        else if (key == "min_demand") num(w.min_demand);
        else if (key == "max_demand") num(w.max_demand);
        else if (key == "min_rate") num(w.min_rate);
        else if (key == "max_rate") num(w.max_rate);
        else if (key == "seed") num(cfg.workload_seed);
        else known = false;
      } else if (section == "optimizer") {
        auto& o = cfg.optimizer;
        try {
          if (key == "algorithms") {
            o.algorithms.clear();
            for (const auto& s : detail::split_list(value)) o.algorithms.push_back(parse_algorithm(s));
          } else if (key == "representations") {
            o.representations.clear();
            for (const auto& s : detail::split_list(value))
              o.representations.push_back(parse_representation(s));
          } else if (key == "strategy") o.strategy = parse_strategy(value);
          else if (key == "cache_budget_mb") num(o.cache_budget_mb);
          else if (key == "population") num(o.population);
          else if (key == "budget") num(o.budget);
          else if (key == "crossover") num(o.crossover_rate);
          else if (key == "mutation") num(o.mutation_rate);
          else if (key == "kappa") num(o.kappa);
          else if (key == "neighbors") num(o.neighbors);
          else if (key == "seeds") o.seeds = detail::parse_seed_list(value, path);
          else if (key == "bench_genotypes") num(o.bench_genotypes);
          else known = false;
        } catch (const std::invalid_argument& e) {
          throw std::invalid_argument("config: " + path + ": " + e.what());
        }
      } else if (section == "output") {
        if (key == "dir") cfg.output.dir = value;
        else known = false;
      } else {
        throw std::invalid_argument("config: unknown section '" + section + "'");
      }
      if (!known) throw std::invalid_argument("config: unknown key '" + path + "'");
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return parse_config(in);
}

// Rejects semantically invalid settings, naming the offending key.
inline void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& path, const std::string& why) {
    throw std::invalid_argument("config: " + path + ": " + why);
  };
  const auto& t = cfg.topology;
  if (t.kind == "fat_tree") {
    if (t.k < 2 || t.k % 2 != 0) fail("topology.k", "fat tree arity must be even and >= 2");
  } else if (t.kind == "leaf_spine") {
    if (t.leaves < 1 || t.spines < 1 || t.servers_per_leaf < 1)
      fail("topology.leaves/spines/servers_per_leaf", "must be >= 1");
  } else if (t.kind == "dcell") {
    if (t.n < 2) fail("topology.n", "dcell needs n >= 2");
  } else {
    fail("topology.kind", "expected fat_tree, leaf_spine or dcell");
  }
  if (t.capacity < 1) fail("topology.capacity", "must be >= 1");

  const auto& m = cfg.model;
  if (!(m.mu_switch > 0.0)) fail("model.mu_switch", "must be positive");
  if (!(m.mu_vnf > 0.0)) fail("model.mu_vnf", "must be positive");
  if (m.buffer_k < 1) fail("model.buffer_k", "must be >= 1");
  if (m.p_idle < 0.0 || m.p_max < m.p_idle) fail("model.p_idle/p_max", "need 0 <= idle <= max");
  if (m.p_switch < 0.0) fail("model.p_switch", "must be >= 0");
  if (m.max_paths < 1) fail("model.max_paths", "must be >= 1");

  const auto& w = cfg.workload;
  if (!(w.fill > 0.0 && w.fill <= 1.0)) fail("workload.fill", "must lie in (0,1]");
  if (w.min_len < 1 || w.max_len < w.min_len) fail("workload.min_len/max_len", "empty range");
  if (w.min_demand < 1 || w.max_demand < w.min_demand)
    fail("workload.min_demand/max_demand", "empty range");
  if (w.min_demand > t.capacity)
    fail("workload.min_demand", "exceeds server capacity, no VNF could ever be placed");
  if (!(w.min_rate > 0.0) || w.max_rate < w.min_rate)
    fail("workload.min_rate/max_rate", "empty or non-positive range");

  const auto& o = cfg.optimizer;
  if (o.algorithms.empty()) fail("optimizer.algorithms", "list is empty");
  if (o.representations.empty()) fail("optimizer.representations", "list is empty");
  if (!(o.cache_budget_mb > 0.0)) fail("optimizer.cache_budget_mb", "must be positive");
  if (o.population < 2) fail("optimizer.population", "must be >= 2");
  if (o.budget < o.population) fail("optimizer.budget", "below population size");
  if (o.crossover_rate < 0.0 || o.crossover_rate > 1.0) fail("optimizer.crossover", "outside [0,1]");
  if (o.mutation_rate < 0.0 || o.mutation_rate > 1.0) fail("optimizer.mutation", "outside [0,1]");
  if (!(o.kappa > 0.0)) fail("optimizer.kappa", "must be positive");
  if (o.neighbors < 2) fail("optimizer.neighbors", "must be >= 2");
  if (o.seeds.empty()) fail("optimizer.seeds", "list is empty");
  if (o.bench_genotypes < 1) fail("optimizer.bench_genotypes", "must be >= 1");
}

inline NetworkGraph build_topology(const TopologyConfig& t) {
  if (t.kind == "fat_tree") return build_fat_tree(t.k, t.capacity);
  if (t.kind == "leaf_spine") return build_leaf_spine(t.leaves, t.spines, t.servers_per_leaf, t.capacity);
  if (t.kind == "dcell") return build_dcell(t.n, t.capacity);
  throw std::invalid_argument("config: topology.kind: expected fat_tree, leaf_spine or dcell");
}

inline std::string topology_label(const TopologyConfig& t) {
  if (t.kind == "fat_tree") return "fat_tree(k=" + std::to_string(t.k) + ")";
  if (t.kind == "leaf_spine")
    return "leaf_spine(l=" + std::to_string(t.leaves) + ",s=" + std::to_string(t.spines) +
           ",m=" + std::to_string(t.servers_per_leaf) + ")";
  return "dcell(n=" + std::to_string(t.n) + ")";
}

// Canonical round-trippable rendering: every key, fixed order. Feeding it
// back through parse_config reproduces the configuration exactly.
inline std::string snapshot(const ExperimentConfig& cfg) {
  std::ostringstream out;
  const auto& t = cfg.topology;
  out << "[topology]\n"
      << "kind = " << t.kind << "\nk = " << t.k << "\nleaves = " << t.leaves
      << "\nspines = " << t.spines << "\nservers_per_leaf = " << t.servers_per_leaf
      << "\nn = " << t.n << "\ncapacity = " << t.capacity << "\n";
  const auto& m = cfg.model;
  out << "\n[model]\n"
      << "mu_switch = " << fmt_double(m.mu_switch) << "\nmu_vnf = " << fmt_double(m.mu_vnf)
      << "\nbuffer_k = " << m.buffer_k << "\np_idle = " << fmt_double(m.p_idle)
      << "\np_max = " << fmt_double(m.p_max) << "\np_switch = " << fmt_double(m.p_switch)
      << "\nmax_paths = " << m.max_paths << "\n";
  const auto& w = cfg.workload;
  out << "\n[workload]\n"
      << "fill = " << fmt_double(w.fill) << "\nmin_len = " << w.min_len
      << "\nmax_len = " << w.max_len << "\nmin_demand = " << w.min_demand
      << "\nmax_demand = " << w.max_demand << "\nmin_rate = " << fmt_double(w.min_rate)
      << "\nmax_rate = " << fmt_double(w.max_rate) << "\nseed = " << cfg.workload_seed << "\n";
  const auto& o = cfg.optimizer;
  out << "\n[optimizer]\nalgorithms = ";
  for (std::size_t i = 0; i < o.algorithms.size(); ++i)
    out << (i ? "," : "") << to_string(o.algorithms[i]);
  out << "\nrepresentations = ";
  for (std::size_t i = 0; i < o.representations.size(); ++i)
    out << (i ? "," : "") << to_string(o.representations[i]);
  out << "\nstrategy = " << to_string(o.strategy)
      << "\ncache_budget_mb = " << fmt_double(o.cache_budget_mb)
      << "\npopulation = " << o.population << "\nbudget = " << o.budget
      << "\ncrossover = " << fmt_double(o.crossover_rate)
      << "\nmutation = " << fmt_double(o.mutation_rate) << "\nkappa = " << fmt_double(o.kappa)
      << "\nneighbors = " << o.neighbors << "\nseeds = ";
  for (std::size_t i = 0; i < o.seeds.size(); ++i) out << (i ? "," : "") << o.seeds[i];
  out << "\nbench_genotypes = " << o.bench_genotypes << "\n";
  out << "\n[output]\ndir = " << cfg.output.dir << "\n";
  return out.str();
}

// Stable identifier for one configuration (FNV-1a over the snapshot).
inline std::string run_id(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : snapshot(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace vnfp
