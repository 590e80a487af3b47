#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "vnfp/config.hpp"
#include "vnfp/harness.hpp"
#include "vnfp/topology.hpp"

namespace {

namespace fs = std::filesystem;

struct CommonFlags {
  std::string config_path;
  std::string out;
  int threads = 0;
  std::optional<std::uint64_t> seed;
  std::optional<int> budget;
};

vnfp::ExperimentConfig load_with_overrides(const CommonFlags& f) {
  vnfp::ExperimentConfig cfg =
      f.config_path.empty() ? vnfp::ExperimentConfig{} : vnfp::load_config(f.config_path);
  if (f.seed) cfg.optimizer.seeds = {*f.seed};
  if (f.budget) cfg.optimizer.budget = *f.budget;
  return cfg;
}

int run_topo(const CommonFlags& flags, const vnfp::TopologyConfig& topo_flags,
             const std::vector<std::string>& set_flags, const std::string& import_path,
             const std::string& export_path) {
  vnfp::ExperimentConfig cfg = load_with_overrides(flags);
  auto given = [&](const std::string& name) {
    return std::find(set_flags.begin(), set_flags.end(), name) != set_flags.end();
  };
  if (given("--kind")) cfg.topology.kind = topo_flags.kind;
  if (given("--k")) cfg.topology.k = topo_flags.k;
  if (given("--leaves")) cfg.topology.leaves = topo_flags.leaves;
  if (given("--spines")) cfg.topology.spines = topo_flags.spines;
  if (given("--servers-per-leaf")) cfg.topology.servers_per_leaf = topo_flags.servers_per_leaf;
  if (given("--n")) cfg.topology.n = topo_flags.n;
  if (given("--capacity")) cfg.topology.capacity = topo_flags.capacity;

  vnfp::NetworkGraph g;
  std::string label;
  if (!import_path.empty()) {
    std::ifstream in(import_path);
    if (!in) throw std::runtime_error("cannot open '" + import_path + "'");
    g = vnfp::read_edge_list(in);
    label = import_path;
  } else {
    g = vnfp::build_topology(cfg.topology);
    label = vnfp::topology_label(cfg.topology);
  }
  if (!export_path.empty()) {
    std::ofstream out(export_path);
    if (!out) throw std::runtime_error("cannot open '" + export_path + "' for writing");
    vnfp::write_edge_list(g, out);
  }
  std::cout << "topology=" << label << " nodes=" << g.node_count()
            << " servers=" << g.server_count()
            << " switches=" << g.node_count() - g.server_count() << " links=" << g.edge_count()
            << "\n";
  return 0;
}

int run_bench(const CommonFlags& flags, std::optional<int> genotypes) {
  vnfp::ExperimentConfig cfg = load_with_overrides(flags);
  if (flags.seed) cfg.workload_seed = *flags.seed;
  if (genotypes) cfg.optimizer.bench_genotypes = *genotypes;
  const auto rows = vnfp::bench_strategies(cfg, &std::cerr);
  const std::string csv = vnfp::bench_csv(rows);
  std::cout << csv;
  if (!flags.out.empty()) {
    fs::create_directories(flags.out);
    vnfp::write_file_atomic(fs::path(flags.out) / "bench.csv", csv);
    std::cerr << "bench: wrote " << (fs::path(flags.out) / "bench.csv").string() << "\n";
  }
  return 0;
}

int run_optimize(const CommonFlags& flags) {
  vnfp::ExperimentConfig cfg = load_with_overrides(flags);
  vnfp::validate(cfg);
  const auto rep = cfg.optimizer.representations.front();
  const auto alg = cfg.optimizer.algorithms.front();
  const auto seed = cfg.optimizer.seeds.front();

  const vnfp::NetworkGraph g = vnfp::build_topology(cfg.topology);
  vnfp::Rng wl_rng(cfg.workload_seed);
  const vnfp::Workload w = vnfp::generate_workload(g, cfg.workload, wl_rng);
  std::cerr << "optimize: " << vnfp::topology_label(cfg.topology) << ", " << w.services.size()
            << " services (fill " << w.fill_fraction << "), " << vnfp::to_string(rep) << "/"
            << vnfp::to_string(alg) << "/s" << seed << "\n";
  vnfp::ProblemInstance inst(
      g, w.services, cfg.model, cfg.optimizer.strategy,
      static_cast<std::uint64_t>(cfg.optimizer.cache_budget_mb * 1024.0 * 1024.0));
  const vnfp::CellRun run = vnfp::run_cell(inst, rep, alg, seed, cfg.optimizer);

  fs::path dir = flags.out.empty()
                     ? fs::path(cfg.output.dir) / (std::string("optimize-") + vnfp::to_string(rep) +
                                                   "-" + vnfp::to_string(alg) + "-s" +
                                                   std::to_string(seed))
                     : fs::path(flags.out);
  fs::create_directories(dir);
  vnfp::write_file_atomic(dir / "archive.json", vnfp::cell_run_json(run).dump());
  std::cout << "evaluations=" << run.evaluations << " feasible=" << run.feasible_evaluations
            << " archive=" << run.front.size() << " runtime_ms=" << run.runtime_ms
            << " out=" << (dir / "archive.json").string() << "\n";
  return 0;
}

int run_compare(const CommonFlags& flags) {
  const vnfp::ExperimentConfig cfg = load_with_overrides(flags);
  const auto outcome = vnfp::compare(cfg, flags.out, flags.threads, &std::cerr);
  std::cout << "compare: executed=" << outcome.executed << " resumed=" << outcome.resumed
            << " failed=" << outcome.failed << " out=" << outcome.dir.string() << "\n";
  return outcome.failed == 0 ? 0 : 1;
}

int run_hv(const std::string& front_path, const std::string& bounds_spec) {
  std::optional<vnfp::Bounds> bounds;
  if (!bounds_spec.empty()) {
    vnfp::Bounds b;
    char comma;
    std::istringstream ss(bounds_spec);
    if (!(ss >> b.utopian[0] >> comma >> b.utopian[1] >> comma >> b.utopian[2] >> comma >>
          b.nadir[0] >> comma >> b.nadir[1] >> comma >> b.nadir[2]))
      throw std::runtime_error("--bounds expects u1,u2,u3,n1,n2,n3");
    bounds = b;
  }
  std::cout << vnfp::fmt_double(vnfp::front_file_hypervolume(front_path, bounds)) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Service chain placement experiments"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto add_common = [&](CLI::App* cmd, bool with_threads = false) {
    cmd->add_option("--config", flags.config_path, "experiment config file");
    cmd->add_option("--out", flags.out, "output directory");
    cmd->add_option("--seed", flags.seed, "override the seed list with one seed");
    cmd->add_option("--budget", flags.budget, "override the evaluation budget");
    if (with_threads)
      cmd->add_option("--threads", flags.threads, "worker threads (default: hardware)");
  };

  auto* topo = app.add_subcommand("topo", "Build or inspect a topology, optionally as edge list");
  vnfp::TopologyConfig topo_flags;
  std::string import_path, export_path;
  topo->add_option("--config", flags.config_path, "experiment config file");
  topo->add_option("--kind", topo_flags.kind, "fat_tree | leaf_spine | dcell");
  topo->add_option("--k", topo_flags.k, "fat tree arity");
  topo->add_option("--leaves", topo_flags.leaves);
  topo->add_option("--spines", topo_flags.spines);
  topo->add_option("--servers-per-leaf", topo_flags.servers_per_leaf);
  topo->add_option("--n", topo_flags.n, "dcell servers per cell");
  topo->add_option("--capacity", topo_flags.capacity, "per-server capacity");
  topo->add_option("--import", import_path, "read an edge-list file instead of building");
  topo->add_option("--export", export_path, "write the graph as an edge-list file");

  auto* bench = app.add_subcommand("bench", "Time the selection strategies on one topology");
  std::optional<int> bench_genotypes;
  add_common(bench);
  bench->add_option("--genotypes", bench_genotypes, "override bench genotype count");

  auto* optimize = app.add_subcommand("optimize", "One optimization run (first cell of config)");
  add_common(optimize);

  auto* compare = app.add_subcommand("compare",
                                     "Sweep representations x algorithms x seeds, aggregate");
  add_common(compare, true);

  auto* hv = app.add_subcommand("hv", "Hypervolume of a front file");
  std::string front_path, bounds_spec;
  hv->add_option("--front", front_path, "front JSON file")->required();
  hv->add_option("--bounds", bounds_spec, "u1,u2,u3,n1,n2,n3 (default: estimated from file)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(topo)) {
      std::vector<std::string> set_flags;
      for (const auto* opt : topo->get_options())
        if (opt->count() > 0) set_flags.push_back(opt->get_name());
      return run_topo(flags, topo_flags, set_flags, import_path, export_path);
    }
    if (app.got_subcommand(bench)) return run_bench(flags, bench_genotypes);
    if (app.got_subcommand(optimize)) return run_optimize(flags);
    if (app.got_subcommand(compare)) return run_compare(flags);
    if (app.got_subcommand(hv)) return run_hv(front_path, bounds_spec);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
