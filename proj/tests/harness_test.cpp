#include "vnfp/harness.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "vnfp/config.hpp"
#include "vnfp/topology.hpp"
#include "vnfp/workload.hpp"

using namespace vnfp;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vnfp_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.topology.kind = "fat_tree";
  cfg.topology.k = 4;
  cfg.workload.fill = 0.4;
  cfg.workload_seed = 11;
  cfg.optimizer.population = 12;
  cfg.optimizer.budget = 60;
  cfg.optimizer.representations = {Representation::Fls, Representation::Pl};
  cfg.optimizer.algorithms = {Algorithm::Nsga2};
  cfg.optimizer.seeds = {5, 9};
  return cfg;
}

}  // namespace

TEST(Workload, FillTargetAndDeterminism) {
  const auto g = build_fat_tree(4);  // 16 servers x 16 units = 256
  WorkloadParams p;
  Rng rng(3);
  const auto w = generate_workload(g, p, rng);
  int total = 0;
  for (const auto& s : w.services) {
    ASSERT_GE(s.length(), 3);
    ASSERT_LE(s.length(), 7);
    for (int d : s.vnf_demands) {
      ASSERT_GE(d, 1);
      ASSERT_LE(d, 4);
    }
    ASSERT_GE(s.arrival_rate, 50.0);
    ASSERT_LE(s.arrival_rate, 200.0);
    total += s.total_demand();
  }
  EXPECT_GE(total, 154);  // ceil(0.6 * 256)
  EXPECT_GE(w.fill_fraction, 0.6);
  EXPECT_DOUBLE_EQ(w.fill_fraction, total / 256.0);

  Rng rng2(3);
  const auto w2 = generate_workload(g, p, rng2);
  ASSERT_EQ(w.services.size(), w2.services.size());
  for (std::size_t i = 0; i < w.services.size(); ++i) {
    EXPECT_EQ(w.services[i].vnf_demands, w2.services[i].vnf_demands);
    EXPECT_EQ(w.services[i].arrival_rate, w2.services[i].arrival_rate);
  }

  p.fill = 0.0;
  Rng rng3(1);
  EXPECT_THROW(generate_workload(g, p, rng3), std::invalid_argument);
  p.fill = 0.5;
  p.min_demand = p.max_demand = 99;  // no server can host any VNF
  EXPECT_THROW(generate_workload(g, p, rng3), std::invalid_argument);
}

TEST(Config, ParsesSectionsListsRangesAndComments) {
  std::istringstream in(R"(
# experiment
[topology]
kind = dcell
n = 6          ; six servers per cell
capacity = 8

[model]
buffer_k = 10
mu_vnf = 1500.5

[workload]
fill = 0.35
seed = 99

[optimizer]
algorithms = nsga2, ibea , moead
representations = fls,pl
strategy = cached
seeds = 4,7..9,20
mutation = 0.25

[output]
dir = elsewhere
)");
  const auto cfg = parse_config(in);
  EXPECT_EQ(cfg.topology.kind, "dcell");
  EXPECT_EQ(cfg.topology.n, 6);
  EXPECT_EQ(cfg.topology.capacity, 8);
  EXPECT_EQ(cfg.model.buffer_k, 10);
  EXPECT_DOUBLE_EQ(cfg.model.mu_vnf, 1500.5);
  EXPECT_DOUBLE_EQ(cfg.workload.fill, 0.35);
  EXPECT_EQ(cfg.workload_seed, 99u);
  EXPECT_EQ(cfg.optimizer.algorithms,
            (std::vector<Algorithm>{Algorithm::Nsga2, Algorithm::Ibea, Algorithm::Moead}));
  EXPECT_EQ(cfg.optimizer.representations,
            (std::vector<Representation>{Representation::Fls, Representation::Pl}));
  EXPECT_EQ(cfg.optimizer.strategy, Strategy::Cached);
  EXPECT_EQ(cfg.optimizer.seeds, (std::vector<std::uint64_t>{4, 7, 8, 9, 20}));
  EXPECT_DOUBLE_EQ(cfg.optimizer.mutation_rate, 0.25);
  EXPECT_EQ(cfg.output.dir, "elsewhere");
  // Untouched keys keep their defaults.
  EXPECT_EQ(cfg.optimizer.population, 100);
}

TEST(Config, RejectsUnknownKeysBadValuesAndInvalidSettings) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
  };
  // The diagnostic names the offending key.
  try {
    parse("[optimizer]\npoplation = 5\n");
    FAIL() << "unknown key accepted";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("optimizer.poplation"), std::string::npos);
  }
  EXPECT_THROW(parse("[nope]\nx = 1\n"), std::invalid_argument);
  EXPECT_THROW(parse("[topology]\nk = twelve\n"), std::invalid_argument);
  EXPECT_THROW(parse("[topology]\nk 12\n"), std::invalid_argument);
  EXPECT_THROW(parse("[topology]\nk = 4\nk = 6\n"), std::invalid_argument);
  EXPECT_THROW(parse("k = 4\n"), std::invalid_argument);  // key before any section
  EXPECT_THROW(parse("[optimizer]\nseeds = 9..1\n"), std::invalid_argument);
  EXPECT_THROW(parse("[optimizer]\nalgorithms = nsga3\n"), std::invalid_argument);

  ExperimentConfig cfg;
  cfg.optimizer.population = 1;
  try {
    validate(cfg);
    FAIL() << "population 1 accepted";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("optimizer.population"), std::string::npos);
  }
  cfg = {};
  cfg.topology.k = 5;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.workload.min_demand = 32;  // exceeds default capacity 16
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.optimizer.budget = 50;  // below default population
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  EXPECT_NO_THROW(validate(ExperimentConfig{}));
}

TEST(Config, SnapshotIsCanonicalFixedPointAndRunIdKeysOnContent) {
  ExperimentConfig cfg = tiny_config();
  const std::string snap = snapshot(cfg);
  std::istringstream in(snap);
  const auto reparsed = parse_config(in);
  EXPECT_EQ(snapshot(reparsed), snap);
  EXPECT_EQ(run_id(reparsed), run_id(cfg));

  ExperimentConfig other = cfg;
  other.optimizer.budget += 1;
  EXPECT_NE(run_id(other), run_id(cfg));
  EXPECT_EQ(run_id(cfg).size(), 16u);
}

TEST(Topology, EdgeListRoundTripPreservesGraph) {
  for (const NetworkGraph& g : {build_fat_tree(4), build_dcell(4, 8), build_leaf_spine(3, 2, 5)}) {
    std::stringstream buf;
    write_edge_list(g, buf);
    const NetworkGraph r = read_edge_list(buf);
    ASSERT_EQ(r.node_count(), g.node_count());
    ASSERT_EQ(r.server_count(), g.server_count());
    for (int v = 0; v < g.node_count(); ++v) {
      ASSERT_EQ(r.is_server(v), g.is_server(v));
      if (g.is_server(v)) {
        ASSERT_EQ(r.capacity(v), g.capacity(v));
        ASSERT_EQ(r.server_id(v), g.server_id(v));
      }
    }
    ASSERT_EQ(r.edges(), g.edges());
  }
}

TEST(Bench, RowsCoverStrategiesAndRespectMemoryBudget) {
  ExperimentConfig cfg = tiny_config();
  cfg.optimizer.bench_genotypes = 30;
  auto rows = bench_strategies(cfg);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].strategy, Strategy::Simple);
  EXPECT_EQ(rows[1].strategy, Strategy::Cached);
  EXPECT_EQ(rows[2].strategy, Strategy::Spanning);
  for (const auto& r : rows) {
    EXPECT_EQ(r.topology, "fat_tree(k=4)");
    EXPECT_EQ(r.servers, 16);
    ASSERT_FALSE(r.skipped);
    EXPECT_GT(r.prepare_ms_mean, 0.0);
    EXPECT_GT(r.prepare_ms_median, 0.0);
    EXPECT_NEAR(r.total_10k_s, r.prepare_ms_mean * 10.0, 1e-12);
  }

  const std::string csv = bench_csv(rows);
  EXPECT_NE(csv.find("topology,servers,strategy,preprocess_s,prepare_ms_mean,prepare_ms_median,"
                     "total_10k_s\n"),
            std::string::npos);
  // Preprocessing on a 36-node graph rounds to 0.00 seconds.
  EXPECT_NE(csv.find("fat_tree(k=4),16,cached,0.00,"), std::string::npos);

  // A cache too large for its budget is reported as a skipped row, and the
  // other strategies still run.
  cfg.optimizer.cache_budget_mb = 1e-6;
  rows = bench_strategies(cfg);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_FALSE(rows[0].skipped);
  EXPECT_TRUE(rows[1].skipped);
  EXPECT_FALSE(rows[2].skipped);
  EXPECT_NE(bench_csv(rows).find("fat_tree(k=4),16,cached,---,---,---,---\n"), std::string::npos);
}

TEST(CellRun, JsonRoundTripAndGenotypeShapes) {
  ExperimentConfig cfg = tiny_config();
  const auto g = build_topology(cfg.topology);
  Rng wl(cfg.workload_seed);
  const auto w = generate_workload(g, cfg.workload, wl);
  ProblemInstance inst(g, w.services, cfg.model, Strategy::Spanning);

  for (Representation rep : {Representation::Fls, Representation::Vls, Representation::Pl}) {
    const CellRun r = run_cell(inst, rep, Algorithm::Nsga2, 5, cfg.optimizer);
    EXPECT_EQ(r.evaluations, 60);
    ASSERT_FALSE(r.front.empty());
    const char* field = rep == Representation::Fls  ? "origins"
                        : rep == Representation::Vls ? "genes"
                                                     : "assignment";
    for (const auto& e : r.front) ASSERT_TRUE(e.genotype.contains(field));

    const CellRun back = cell_run_from_json(cell_run_json(r));
    EXPECT_EQ(back.representation, r.representation);
    EXPECT_EQ(back.algorithm, r.algorithm);
    EXPECT_EQ(back.seed, r.seed);
    EXPECT_EQ(back.evaluations, r.evaluations);
    EXPECT_EQ(back.feasible_evaluations, r.feasible_evaluations);
    ASSERT_EQ(back.front.size(), r.front.size());
    for (std::size_t i = 0; i < r.front.size(); ++i) {
      EXPECT_EQ(back.front[i].objectives, r.front[i].objectives);
      EXPECT_EQ(back.front[i].genotype, r.front[i].genotype);
    }
  }
}

TEST(Compare, SweepAggregatesResumesAndReproduces) {
  const ExperimentConfig cfg = tiny_config();
  const auto dir1 = fresh_dir("cmp1");

  const auto out1 = compare(cfg, dir1.string(), 4);
  EXPECT_EQ(out1.executed, 4);
  EXPECT_EQ(out1.resumed, 0);
  EXPECT_EQ(out1.failed, 0);
  for (const char* f : {"metrics.csv", "archive.json", "timings.csv", "summary.json",
                        "config.snapshot"})
    EXPECT_TRUE(fs::exists(dir1 / f)) << f;
  EXPECT_EQ(slurp(dir1 / "config.snapshot"), snapshot(cfg));

  // Row order is fixed: representation-major, then algorithm, then seed.
  std::istringstream metrics(slurp(dir1 / "metrics.csv"));
  std::string line;
  std::getline(metrics, line);
  EXPECT_EQ(line,
            "representation,algorithm,seed,hypervolume,evaluations,feasible_evaluations,"
            "archive_size");
  std::vector<std::string> prefixes;
  while (std::getline(metrics, line)) prefixes.push_back(line.substr(0, line.find(',', 10)));
  EXPECT_EQ(prefixes, (std::vector<std::string>{"fls,nsga2,5", "fls,nsga2,9", "pl,nsga2,5",
                                                "pl,nsga2,9"}));

  // Hypervolumes are normalized against bounds shared across the sweep.
  const json summary = json::parse(slurp(dir1 / "summary.json"));
  ASSERT_EQ(summary.at("cells").size(), 2u);
  ASSERT_TRUE(summary.contains("best"));
  EXPECT_TRUE(summary.at("errors").empty());
  int with_p = 0;
  for (const auto& c : summary.at("cells")) {
    EXPECT_GE(c.at("mean_hv").get<double>(), 0.0);
    EXPECT_LE(c.at("mean_hv").get<double>(), 1.0);
    with_p += c.contains("p_vs_best") ? 1 : 0;
  }
  EXPECT_EQ(with_p, 1);  // every cell but the best gets a p-value

  // Second invocation resumes every run and leaves the aggregates unchanged.
  const std::string m1 = slurp(dir1 / "metrics.csv"), a1 = slurp(dir1 / "archive.json");
  const auto out2 = compare(cfg, dir1.string(), 4);
  EXPECT_EQ(out2.executed, 0);
  EXPECT_EQ(out2.resumed, 4);
  EXPECT_EQ(slurp(dir1 / "metrics.csv"), m1);
  EXPECT_EQ(slurp(dir1 / "archive.json"), a1);

  // Partial resume: drop one run file, only that run is recomputed, and the
  // aggregation over parsed-back results is byte-identical.
  fs::remove(dir1 / "runs" / "pl-nsga2-s9.json");
  const auto out3 = compare(cfg, dir1.string(), 2);
  EXPECT_EQ(out3.executed, 1);
  EXPECT_EQ(out3.resumed, 3);
  EXPECT_EQ(slurp(dir1 / "metrics.csv"), m1);
  EXPECT_EQ(slurp(dir1 / "archive.json"), a1);

  // A fresh directory and different thread count reproduce the same bytes.
  const auto dir2 = fresh_dir("cmp2");
  compare(cfg, dir2.string(), 1);
  EXPECT_EQ(slurp(dir2 / "metrics.csv"), m1);
  EXPECT_EQ(slurp(dir2 / "archive.json"), a1);

  // Reusing an output directory with a different configuration is refused.
  ExperimentConfig other = cfg;
  other.optimizer.budget += 12;
  EXPECT_THROW(compare(other, dir1.string(), 1), std::runtime_error);

  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST(Compare, RecordsPerRunFailuresWithoutAbortingSweep) {
  // VLS has no mutation operator, so a closed crossover gate can never mint
  // new genotypes: those runs abort with a diagnostic while FLS completes.
  ExperimentConfig cfg = tiny_config();
  cfg.optimizer.representations = {Representation::Fls, Representation::Vls};
  cfg.optimizer.seeds = {5};
  cfg.optimizer.crossover_rate = 0.0;
  const auto dir = fresh_dir("cmpfail");

  const auto out = compare(cfg, dir.string(), 2);
  EXPECT_EQ(out.executed, 1);
  EXPECT_EQ(out.failed, 1);

  const json summary = json::parse(slurp(dir / "summary.json"));
  ASSERT_EQ(summary.at("errors").size(), 1u);
  EXPECT_EQ(summary.at("errors")[0].at("representation"), "vls");
  // metrics.csv only carries the successful run.
  std::istringstream metrics(slurp(dir / "metrics.csv"));
  std::string line;
  int rows = 0;
  std::getline(metrics, line);
  while (std::getline(metrics, line)) ++rows;
  EXPECT_EQ(rows, 1);

  // The failure is recorded in its run file, so a rerun does not retry it.
  const auto again = compare(cfg, dir.string(), 1);
  EXPECT_EQ(again.executed, 0);
  EXPECT_EQ(again.failed, 1);
  fs::remove_all(dir);
}

TEST(FrontFiles, LoadShapesAndHypervolume) {
  const auto dir = fresh_dir("fronts");

  // Bare triples.
  write_file_atomic(dir / "plain.json", "[[0.0,0.0,0.0]]");
  Bounds unit{{0, 0, 0}, {1, 1, 1}};
  EXPECT_DOUBLE_EQ(front_file_hypervolume(dir / "plain.json", unit), 1.0);
  // Points at or beyond the nadir dominate no volume at all.
  write_file_atomic(dir / "worst.json", "[[1.0,1.0,1.0],[2.0,0.5,0.5]]");
  EXPECT_DOUBLE_EQ(front_file_hypervolume(dir / "worst.json", unit), 0.0);

  // Field objects, single run object, and a whole archive are all accepted.
  write_file_atomic(dir / "fields.json",
                    R"([{"latency":0.5,"loss":0.5,"energy":0.5}])");
  EXPECT_DOUBLE_EQ(front_file_hypervolume(dir / "fields.json", unit), 0.125);
  write_file_atomic(dir / "run.json",
                    R"({"front":[{"latency":0.5,"loss":0.5,"energy":0.5}],"seed":1})");
  EXPECT_EQ(load_front_points(read_json_file(dir / "run.json")).size(), 1u);
  write_file_atomic(
      dir / "archive.json",
      R"([{"front":[{"latency":1,"loss":2,"energy":3},{"latency":4,"loss":5,"energy":6}]},
          {"front":[{"latency":7,"loss":8,"energy":9}]},
          {"error":"stagnated","representation":"vls"}])");
  const auto pts = load_front_points(read_json_file(dir / "archive.json"));
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[2], (Point3{7.0, 8.0, 9.0}));

  // Without explicit bounds they are estimated from the file itself.
  EXPECT_GT(front_file_hypervolume(dir / "archive.json"), 0.0);
  fs::remove_all(dir);
}
