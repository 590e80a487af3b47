#pragma once

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "encoding.hpp"
#include "metrics.hpp"
#include "moea.hpp"

namespace vnfp {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline json genotype_json(const FLSGenotype& g) { return json{{"origins", g.origins}}; }

inline json genotype_json(const VLSGenotype& g) {
  json genes = json::array();
  for (const auto& gene : g.genes) genes.push_back({gene.service, gene.server});
  return json{{"genes", std::move(genes)}};
}

inline json genotype_json(const PLGenotype& g) { return json{{"assignment", g.assignment}}; }

inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    f << content;
    if (!f) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "'");
  return json::parse(f);
}

// ---------------------------------------------------------------------------
// Strategy benchmark
// ---------------------------------------------------------------------------

struct BenchRow {
  std::string topology;
  int servers = 0;
  Strategy strategy = Strategy::Simple;
  bool skipped = false;
  std::string reason;
  double preprocess_s = 0.0;
  double prepare_ms_mean = 0.0;
  double prepare_ms_median = 0.0;
  double total_10k_s = 0.0;  // extrapolated from the mean
};

namespace detail {

inline double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// One solution preparation: expand a vector of per-service origins into a
// full placement, each VNF searched from its predecessor's host.
inline void prepare_solution(const PlacementEngine& engine,
                             const std::vector<ServiceChain>& services,
                             const std::vector<int>& origins) {
  const NetworkGraph& g = engine.graph();
  PlacementContext ctx = engine.make_context();
  for (std::size_t i = 0; i < services.size(); ++i) {
    int from = g.server_node(origins[i]);
    for (int d : services[i].vnf_demands) {
      const auto found = ctx.place(from, d);
      if (!found) break;  // saturated; preparation of this chain ends here
      from = g.server_node(*found);
    }
  }
}

}  // namespace detail

// Times every selection strategy on the configured topology: one-off
// preprocessing, then mean/median wall time to prepare a solution, over
// `bench_genotypes` random genotypes (plus one untimed warm-up). A strategy
// whose preprocessing exceeds the memory budget is reported, not fatal.
inline std::vector<BenchRow> bench_strategies(const ExperimentConfig& cfg,
                                              std::ostream* progress = nullptr) {
  validate(cfg);
  const NetworkGraph g = build_topology(cfg.topology);
  Rng wl_rng(cfg.workload_seed);
  const Workload w = generate_workload(g, cfg.workload, wl_rng);

  const int n_genotypes = cfg.optimizer.bench_genotypes;
  Rng geno_rng(mix_seed(cfg.workload_seed, 0xbe9cull));
  std::vector<std::vector<int>> origin_sets(n_genotypes + 1);  // [0] is the warm-up
  for (auto& origins : origin_sets) {
    origins.resize(w.services.size());
    for (auto& o : origins) o = static_cast<int>(geno_rng.uniform_index(g.server_count()));
  }

  const auto budget_bytes =
      static_cast<std::uint64_t>(cfg.optimizer.cache_budget_mb * 1024.0 * 1024.0);
  std::vector<BenchRow> rows;
  for (Strategy strat : {Strategy::Simple, Strategy::Cached, Strategy::Spanning}) {
    BenchRow row;
    row.topology = topology_label(cfg.topology);
    row.servers = g.server_count();
    row.strategy = strat;
    if (progress) *progress << "bench: " << to_string(strat) << " preprocessing...\n";
    std::optional<PlacementEngine> engine;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      engine.emplace(g, strat, budget_bytes);
    } catch (const ResourceError& e) {
      row.skipped = true;
      row.reason = e.what();
      rows.push_back(std::move(row));
      if (progress) *progress << "bench: " << to_string(strat) << " skipped: " << e.what() << "\n";
      continue;
    }
    row.preprocess_s = detail::ms_since(t0) / 1000.0;

    std::vector<double> per_solution;
    per_solution.reserve(n_genotypes);
    for (int k = 0; k <= n_genotypes; ++k) {
      const auto t1 = std::chrono::steady_clock::now();
      detail::prepare_solution(*engine, w.services, origin_sets[k]);
      if (k > 0) per_solution.push_back(detail::ms_since(t1));
    }
    double sum = 0.0;
    for (double v : per_solution) sum += v;
    row.prepare_ms_mean = sum / per_solution.size();
    std::sort(per_solution.begin(), per_solution.end());
    row.prepare_ms_median = per_solution[per_solution.size() / 2];
    row.total_10k_s = row.prepare_ms_mean * 10.0;  // 10 000 solutions, in seconds
    if (progress)
      *progress << "bench: " << to_string(strat) << " prepare mean " << row.prepare_ms_mean
                << " ms\n";
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream out;
  out << "topology,servers,strategy,preprocess_s,prepare_ms_mean,prepare_ms_median,total_10k_s\n";
  char buf[64];
  auto num = [&](double v, const char* fmt) {
    std::snprintf(buf, sizeof buf, fmt, v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    out << r.topology << ',' << r.servers << ',' << to_string(r.strategy) << ',';
    if (r.skipped) {
      out << "---,---,---,---\n";
    } else {
      out << num(r.preprocess_s, "%.2f") << ',' << num(r.prepare_ms_mean, "%.4f") << ','
          << num(r.prepare_ms_median, "%.4f") << ',' << num(r.total_10k_s, "%.2f") << "\n";
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Optimization runs
// ---------------------------------------------------------------------------

struct FrontEntry {
  ObjectiveVector objectives;
  json genotype;
};

struct CellRun {
  Representation representation = Representation::Fls;
  Algorithm algorithm = Algorithm::Nsga2;
  std::uint64_t seed = 0;
  int evaluations = 0;
  int feasible_evaluations = 0;
  double runtime_ms = 0.0;  // optimization only, preprocessing excluded
  std::vector<FrontEntry> front;
  std::string error;  // non-empty: the run failed and carries no front
};

namespace detail {

template <class Problem>
CellRun run_cell_impl(Problem problem, Representation rep, Algorithm alg, std::uint64_t seed,
                      const OptimizerConfig& o) {
  RunConfig rc;
  rc.algorithm = alg;
  rc.population = o.population;
  rc.budget = o.budget;
  rc.crossover_rate = o.crossover_rate;
  rc.mutation_rate = o.mutation_rate > 0.0
                         ? o.mutation_rate
                         : 1.0 / static_cast<double>(problem.instance().service_count());
  rc.ibea_kappa = o.kappa;
  rc.moead_neighbors = o.neighbors;
  rc.seed = seed;

  CellRun out;
  out.representation = rep;
  out.algorithm = alg;
  out.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = run(problem, rc);
  out.runtime_ms = ms_since(t0);
  out.evaluations = res.evaluations;
  out.feasible_evaluations = res.feasible_evaluations;
  for (const auto& m : res.archive) out.front.push_back({m.objectives, genotype_json(m.genotype)});
  return out;
}

}  // namespace detail

inline CellRun run_cell(const ProblemInstance& inst, Representation rep, Algorithm alg,
                        std::uint64_t seed, const OptimizerConfig& o) {
  switch (rep) {
    case Representation::Fls: return detail::run_cell_impl(FlsProblem(inst), rep, alg, seed, o);
    case Representation::Vls: return detail::run_cell_impl(VlsProblem(inst), rep, alg, seed, o);
    case Representation::Pl: return detail::run_cell_impl(PlProblem(inst), rep, alg, seed, o);
  }
  throw std::logic_error("run_cell: bad representation");
}

inline json cell_run_json(const CellRun& r) {
  json j{{"representation", to_string(r.representation)},
         {"algorithm", to_string(r.algorithm)},
         {"seed", r.seed}};
  if (!r.error.empty()) {
    j["error"] = r.error;
    return j;
  }
  j["evaluations"] = r.evaluations;
  j["feasible_evaluations"] = r.feasible_evaluations;
  j["runtime_ms"] = r.runtime_ms;
  json front = json::array();
  for (const auto& e : r.front)
    front.push_back({{"latency", e.objectives.latency},
                     {"loss", e.objectives.loss},
                     {"energy", e.objectives.energy},
                     {"genotype", e.genotype}});
  j["front"] = std::move(front);
  return j;
}

inline CellRun cell_run_from_json(const json& j) {
  CellRun r;
  r.representation = parse_representation(j.at("representation").get<std::string>());
  r.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("error")) {
    r.error = j["error"].get<std::string>();
    return r;
  }
  r.evaluations = j.at("evaluations").get<int>();
  r.feasible_evaluations = j.at("feasible_evaluations").get<int>();
  r.runtime_ms = j.at("runtime_ms").get<double>();
  for (const auto& e : j.at("front")) {
    FrontEntry fe;
    fe.objectives.latency = e.at("latency").get<double>();
    fe.objectives.loss = e.at("loss").get<double>();
    fe.objectives.energy = e.at("energy").get<double>();
    fe.genotype = e.value("genotype", json());
    r.front.push_back(std::move(fe));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Full comparison sweep
// ---------------------------------------------------------------------------

struct CompareOutcome {
  std::filesystem::path dir;
  int executed = 0;
  int resumed = 0;
  int failed = 0;
};

// Runs representations x algorithms x seeds on one instance. Each run lands
// in its own JSON file (written atomically), so an interrupted sweep resumes
// by skipping every run whose file already exists. Aggregated outputs:
// metrics.csv and archive.json (deterministic, no timings), timings.csv,
// summary.json, config.snapshot.
inline CompareOutcome compare(const ExperimentConfig& cfg, const std::string& out_override = "",
                              int threads = 0, std::ostream* progress = nullptr) {
  validate(cfg);
  namespace fs = std::filesystem;
  CompareOutcome outcome;
  outcome.dir = out_override.empty() ? fs::path(cfg.output.dir) / run_id(cfg)
                                     : fs::path(out_override);
  fs::create_directories(outcome.dir / "runs");

  const std::string snap = snapshot(cfg);
  const fs::path snap_path = outcome.dir / "config.snapshot";
  if (fs::exists(snap_path)) {
    std::ifstream f(snap_path, std::ios::binary);
    std::stringstream prior;
    prior << f.rdbuf();
    if (prior.str() != snap)
      throw std::runtime_error("output directory '" + outcome.dir.string() +
                               "' holds results for a different configuration");
  } else {
    write_file_atomic(snap_path, snap);
  }

  struct Task {
    Representation rep;
    Algorithm alg;
    std::uint64_t seed;
    fs::path file;
  };
  std::vector<Task> tasks;
  for (Representation rep : cfg.optimizer.representations)
    for (Algorithm alg : cfg.optimizer.algorithms)
      for (std::uint64_t seed : cfg.optimizer.seeds) {
        const std::string name = std::string(to_string(rep)) + "-" + to_string(alg) + "-s" +
                                 std::to_string(seed) + ".json";
        tasks.push_back({rep, alg, seed, outcome.dir / "runs" / name});
      }

  bool any_missing = false;
  for (const auto& t : tasks) any_missing |= !fs::exists(t.file);

  // The instance (topology, routing tables, strategy preprocessing) is built
  // once and shared; runs only read it, so they can execute in parallel.
  const NetworkGraph g = build_topology(cfg.topology);
  Rng wl_rng(cfg.workload_seed);
  const Workload w = generate_workload(g, cfg.workload, wl_rng);
  std::optional<ProblemInstance> inst;
  if (any_missing) {
    inst.emplace(g, w.services, cfg.model, cfg.optimizer.strategy,
                 static_cast<std::uint64_t>(cfg.optimizer.cache_budget_mb * 1024.0 * 1024.0));
  }

  std::vector<CellRun> results(tasks.size());
  std::vector<char> was_resumed(tasks.size(), 0);
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& t = tasks[i];
      try {
        if (fs::exists(t.file)) {
          results[i] = cell_run_from_json(read_json_file(t.file));
          was_resumed[i] = 1;
        } else {
          if (!inst) throw std::runtime_error("run file disappeared mid-sweep");
          CellRun r = run_cell(*inst, t.rep, t.alg, t.seed, cfg.optimizer);
          write_file_atomic(t.file, cell_run_json(r).dump());
          results[i] = std::move(r);
        }
      } catch (const std::exception& e) {
        CellRun r;
        r.representation = t.rep;
        r.algorithm = t.alg;
        r.seed = t.seed;
        r.error = e.what();
        if (!fs::exists(t.file)) write_file_atomic(t.file, cell_run_json(r).dump());
        results[i] = std::move(r);
      }
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        const auto& r = results[i];
        *progress << "compare: " << to_string(t.rep) << "/" << to_string(t.alg) << "/s" << t.seed
                  << (r.error.empty() ? "" : " FAILED: " + r.error) << "\n";
      }
    }
  };
  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(tasks.size())));
  {
    std::vector<std::thread> pool;
    for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i].error.empty()) ++outcome.failed;
    else if (was_resumed[i]) ++outcome.resumed;
    else ++outcome.executed;
  }

  // Hypervolume bounds are shared across every run of the comparison so the
  // values are mutually comparable.
  std::vector<ObjectiveVector> all_points;
  for (const auto& r : results)
    for (const auto& e : r.front) all_points.push_back(e.objectives);
  std::optional<Bounds> bounds;
  if (!all_points.empty()) bounds = estimate_bounds(all_points);
  auto front_hv = [&](const std::vector<FrontEntry>& front) {
    if (!bounds || front.empty()) return 0.0;
    std::vector<Point3> pts;
    pts.reserve(front.size());
    for (const auto& e : front) pts.push_back(normalize(to_point(e.objectives), *bounds));
    return hypervolume(pts);
  };

  std::ostringstream metrics, timings;
  metrics << "representation,algorithm,seed,hypervolume,evaluations,feasible_evaluations,"
             "archive_size\n";
  timings << "representation,algorithm,seed,runtime_ms\n";
  json archive = json::array();
  std::vector<double> hvs(results.size(), 0.0);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& r = results[i];
    if (!r.error.empty()) continue;
    hvs[i] = front_hv(r.front);
    metrics << to_string(r.representation) << ',' << to_string(r.algorithm) << ',' << r.seed << ','
            << fmt_double(hvs[i]) << ',' << r.evaluations << ',' << r.feasible_evaluations << ','
            << r.front.size() << "\n";
    timings << to_string(r.representation) << ',' << to_string(r.algorithm) << ',' << r.seed << ','
            << fmt_double(r.runtime_ms) << "\n";
    json jr = cell_run_json(r);
    jr.erase("runtime_ms");  // timings live in timings.csv only
    archive.push_back(std::move(jr));
  }

  // Per-cell aggregation: mean hypervolume, and a rank-sum p-value against
  // the cell with the best mean (omitted for degenerate comparisons).
  struct Cell {
    Representation rep;
    Algorithm alg;
    std::vector<double> samples;
  };
  std::vector<Cell> cells;
  for (Representation rep : cfg.optimizer.representations)
    for (Algorithm alg : cfg.optimizer.algorithms) {
      Cell c{rep, alg, {}};
      for (std::size_t i = 0; i < tasks.size(); ++i)
        if (tasks[i].rep == rep && tasks[i].alg == alg && results[i].error.empty())
          c.samples.push_back(hvs[i]);
      cells.push_back(std::move(c));
    }
  int best = -1;
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
  };
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (!cells[c].samples.empty() && (best < 0 || mean(cells[c].samples) > mean(cells[best].samples)))
      best = static_cast<int>(c);

  json summary;
  summary["run_id"] = run_id(cfg);
  summary["topology"] = topology_label(cfg.topology);
  summary["servers"] = g.server_count();
  summary["services"] = w.services.size();
  summary["fill_fraction"] = w.fill_fraction;
  if (bounds) {
    summary["bounds"] = {{"utopian", bounds->utopian}, {"nadir", bounds->nadir}};
  }
  json jcells = json::array();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    json jc{{"representation", to_string(cells[c].rep)},
            {"algorithm", to_string(cells[c].alg)},
            {"runs", cells[c].samples.size()},
            {"mean_hv", mean(cells[c].samples)}};
    const bool degenerate = cells.size() < 2 || cells[c].samples.size() < 2 ||
                            best < 0 || cells[best].samples.size() < 2;
    if (static_cast<int>(c) != best && !degenerate)
      jc["p_vs_best"] = rank_sum_p(cells[best].samples, cells[c].samples);
    jcells.push_back(std::move(jc));
  }
  summary["cells"] = std::move(jcells);
  if (best >= 0)
    summary["best"] = {{"representation", to_string(cells[best].rep)},
                       {"algorithm", to_string(cells[best].alg)}};
  json errors = json::array();
  for (const auto& r : results)
    if (!r.error.empty())
      errors.push_back({{"representation", to_string(r.representation)},
                        {"algorithm", to_string(r.algorithm)},
                        {"seed", r.seed},
                        {"error", r.error}});
  summary["errors"] = std::move(errors);

  write_file_atomic(outcome.dir / "metrics.csv", metrics.str());
  write_file_atomic(outcome.dir / "timings.csv", timings.str());
  write_file_atomic(outcome.dir / "archive.json", archive.dump());
  write_file_atomic(outcome.dir / "summary.json", summary.dump(2));
  return outcome;
}

// ---------------------------------------------------------------------------
// Front files and hypervolume
// ---------------------------------------------------------------------------

// Accepts a bare list of [latency, loss, energy] triples, a list of objects
// with those fields, one run object with a "front", or a whole archive.json
// (list of run objects); fronts are flattened.
inline std::vector<Point3> load_front_points(const json& j) {
  std::vector<Point3> pts;
  auto add_entry = [&](const json& e) {
    if (e.is_array()) {
      if (e.size() != 3) throw std::runtime_error("front entry is not a triple");
      pts.push_back({e[0].get<double>(), e[1].get<double>(), e[2].get<double>()});
    } else {
      pts.push_back({e.at("latency").get<double>(), e.at("loss").get<double>(),
                     e.at("energy").get<double>()});
    }
  };
  if (j.is_object()) {
    for (const auto& e : j.at("front")) add_entry(e);
    return pts;
  }
  for (const auto& item : j) {
    if (item.is_object() && item.contains("front")) {
      for (const auto& e : item["front"]) add_entry(e);
    } else if (item.is_object() && item.contains("error")) {
      continue;
    } else {
      add_entry(item);
    }
  }
  return pts;
}

inline double front_file_hypervolume(const std::filesystem::path& path,
                                     const std::optional<Bounds>& bounds = std::nullopt) {
  const auto pts = load_front_points(read_json_file(path));
  if (pts.empty()) return 0.0;
  const Bounds b = bounds ? *bounds : estimate_bounds(pts);
  std::vector<Point3> norm;
  norm.reserve(pts.size());
  for (const auto& p : pts) norm.push_back(normalize(p, b));
  return hypervolume(norm);
}

}  // namespace vnfp
