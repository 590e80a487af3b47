#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "metrics.hpp"
#include "rng.hpp"

namespace vnfp {

// ---------------------------------------------------------------------------
// Dominance, sorting, crowding
// ---------------------------------------------------------------------------

inline bool dominates(const Point3& a, const Point3& b) {
  bool strict = false;
  for (int d = 0; d < 3; ++d) {
    if (a[d] > b[d]) return false;
    if (a[d] < b[d]) strict = true;
  }
  return strict;
}

// Fast non-dominated sort (dominance counts + dominated lists). Infeasible
// individuals form one extra final front: dominated by every feasible one,
// mutually non-dominated among themselves.
inline std::vector<int> non_dominated_ranks(const std::vector<Point3>& pts,
                                            const std::vector<char>& feasible) {
  const int n = static_cast<int>(pts.size());
  if (static_cast<int>(feasible.size()) != n)
    throw std::invalid_argument("non_dominated_ranks: size mismatch");
  std::vector<int> rank(n, 0);

  std::vector<int> feas;
  for (int i = 0; i < n; ++i)
    if (feasible[i]) feas.push_back(i);

  std::vector<std::vector<int>> dominated(feas.size());
  std::vector<int> count(feas.size(), 0);
  for (std::size_t a = 0; a < feas.size(); ++a)
    for (std::size_t b = 0; b < feas.size(); ++b) {
      if (a == b) continue;
      if (dominates(pts[feas[a]], pts[feas[b]])) dominated[a].push_back(static_cast<int>(b));
    }
  for (std::size_t a = 0; a < feas.size(); ++a)
    for (std::size_t b = 0; b < feas.size(); ++b)
      if (a != b && dominates(pts[feas[b]], pts[feas[a]])) count[a]++;

  std::vector<int> front;
  for (std::size_t a = 0; a < feas.size(); ++a)
    if (count[a] == 0) front.push_back(static_cast<int>(a));
  int level = 0;
  while (!front.empty()) {
    std::vector<int> next;
    for (int a : front) {
      rank[feas[a]] = level;
      for (int b : dominated[a])
        if (--count[b] == 0) next.push_back(b);
    }
    front = std::move(next);
    ++level;
  }

  for (int i = 0; i < n; ++i)
    if (!feasible[i]) rank[i] = level;  // level 0 when nothing is feasible
  return rank;
}

// NSGA-II crowding distance within one front. Boundary points are infinite;
// an objective the front does not vary in contributes nothing.
inline std::vector<double> crowding_distance(const std::vector<Point3>& front) {
  const int n = static_cast<int>(front.size());
  std::vector<double> dist(n, 0.0);
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    return dist;
  }
  std::vector<int> order(n);
  for (int d = 0; d < 3; ++d) {
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return front[a][d] < front[b][d]; });
    const double span = front[order[n - 1]][d] - front[order[0]][d];
    dist[order[0]] = dist[order[n - 1]] = std::numeric_limits<double>::infinity();
    if (span <= 0.0) continue;
    for (int i = 1; i + 1 < n; ++i)
      dist[order[i]] += (front[order[i + 1]][d] - front[order[i - 1]][d]) / span;
  }
  return dist;
}

// ---------------------------------------------------------------------------
// IBEA: additive epsilon indicator fitness and environmental selection
// ---------------------------------------------------------------------------

namespace detail {

// I(a,b): smallest shift making a weakly dominate b, on objectives
// pre-normalized to [0,1] over the population.
inline double additive_epsilon(const Point3& a, const Point3& b) {
  double eps = -std::numeric_limits<double>::infinity();
  for (int d = 0; d < 3; ++d) eps = std::max(eps, a[d] - b[d]);
  return eps;
}

struct IbeaTable {
  std::vector<std::vector<double>> exp_term;  // exp(-I(a,b)/(c*kappa))
  std::vector<double> fitness;                // F(b) = sum_a -exp_term[a][b]
};

inline IbeaTable ibea_table(const std::vector<Point3>& pts, double kappa) {
  const int n = static_cast<int>(pts.size());
  Bounds b{};
  if (n > 0) b = estimate_bounds(pts);
  std::vector<Point3> norm(n);
  for (int i = 0; i < n; ++i) norm[i] = normalize(pts[i], b);

  double c = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) c = std::max(c, std::abs(additive_epsilon(norm[i], norm[j])));

  IbeaTable t;
  t.exp_term.assign(n, std::vector<double>(n, 0.0));
  t.fitness.assign(n, 0.0);
  const double scale = c * kappa;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double e =
          scale > 0.0 ? std::exp(-additive_epsilon(norm[i], norm[j]) / scale) : 0.0;
      t.exp_term[i][j] = e;
      t.fitness[j] -= e;
    }
  return t;
}

}  // namespace detail

inline std::vector<double> ibea_fitness(const std::vector<Point3>& pts, double kappa = 0.05) {
  return detail::ibea_table(pts, kappa).fitness;
}

// Iteratively drops the worst-fitness individual (ties to the lowest index),
// updating survivors incrementally, until `keep` remain. Normalization and
// the scaling factor are fixed at entry, as in the standard scheme. Returns
// surviving indices in ascending order.
inline std::vector<int> ibea_env_select(const std::vector<Point3>& pts, std::size_t keep,
                                        double kappa = 0.05) {
  auto t = detail::ibea_table(pts, kappa);
  std::vector<char> alive(pts.size(), 1);
  std::size_t n_alive = pts.size();
  while (n_alive > keep) {
    int worst = -1;
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (alive[i] && (worst < 0 || t.fitness[i] < t.fitness[worst])) worst = static_cast<int>(i);
    alive[worst] = 0;
    --n_alive;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (alive[j]) t.fitness[j] += t.exp_term[static_cast<std::size_t>(worst)][j];
  }
  std::vector<int> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (alive[i]) out.push_back(static_cast<int>(i));
  return out;
}

// ---------------------------------------------------------------------------
// MOEA/D: weights, neighborhoods, scalarization
// ---------------------------------------------------------------------------

// Largest three-objective simplex lattice {(i,j,k)/H : i+j+k = H} whose size
// C(H+2,2) does not exceed the requested population.
inline std::vector<Point3> simplex_lattice_weights(int max_pop) {
  if (max_pop < 3) throw std::invalid_argument("simplex_lattice_weights: population too small");
  int h = 1;
  while ((h + 3) * (h + 2) / 2 <= max_pop) ++h;
  std::vector<Point3> w;
  for (int i = 0; i <= h; ++i)
    for (int j = 0; i + j <= h; ++j)
      w.push_back({static_cast<double>(i) / h, static_cast<double>(j) / h,
                   static_cast<double>(h - i - j) / h});
  return w;
}

inline std::vector<std::vector<int>> moead_neighborhoods(const std::vector<Point3>& weights,
                                                         int t_size) {
  const int m = static_cast<int>(weights.size());
  t_size = std::min(t_size, m);
  std::vector<std::vector<int>> nb(m);
  std::vector<std::pair<double, int>> d(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double diff = weights[i][k] - weights[j][k];
        s += diff * diff;
      }
      d[j] = {s, j};
    }
    std::sort(d.begin(), d.end());
    nb[i].reserve(t_size);
    for (int j = 0; j < t_size; ++j) nb[i].push_back(d[j].second);
  }
  return nb;
}

inline double tchebycheff(const Point3& f, const Point3& w, const Point3& ideal) {
  double v = 0.0;
  for (int d = 0; d < 3; ++d) v = std::max(v, w[d] * std::abs(f[d] - ideal[d]));
  return v;
}

// ---------------------------------------------------------------------------
// Run driver
// ---------------------------------------------------------------------------

enum class Algorithm { Nsga2, Ibea, Moead };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Nsga2: return "nsga2";
    case Algorithm::Ibea: return "ibea";
    case Algorithm::Moead: return "moead";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "nsga2") return Algorithm::Nsga2;
  if (s == "ibea") return Algorithm::Ibea;
  if (s == "moead") return Algorithm::Moead;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

struct RunConfig {
  Algorithm algorithm = Algorithm::Nsga2;
  int population = 100;
  int budget = 10000;
  double crossover_rate = 0.9;
  double mutation_rate = 0.01;
  double ibea_kappa = 0.05;
  int moead_neighbors = 20;
  std::uint64_t seed = 1;
};

struct GenerationLog {
  int evaluations = 0;
  int archive_size = 0;
  double archive_hv = 0.0;  // archive normalized against its own bounds
  std::int64_t elapsed_ms = 0;
};

template <class Problem>
struct RunResult {
  using Genotype = typename Problem::Genotype;
  struct Member {
    Genotype genotype;
    ObjectiveVector objectives;
    bool feasible = false;
  };
  std::vector<Member> population;
  std::vector<Member> archive;  // non-dominated over every feasible evaluation
  std::vector<GenerationLog> log;
  int evaluations = 0;
  int feasible_evaluations = 0;
};

namespace detail {

template <class Member>
double archive_hypervolume(const std::vector<Member>& archive) {
  if (archive.empty()) return 0.0;
  std::vector<Point3> pts;
  pts.reserve(archive.size());
  for (const auto& m : archive) pts.push_back(to_point(m.objectives));
  return hypervolume(normalize(pts, estimate_bounds(pts)));
}

}  // namespace detail

// Runs the configured algorithm for exactly `budget` decode+evaluate calls.
// Offspring copied verbatim from a parent (failed crossover gate, identity
// mutation) reuse the parent's cached evaluation and consume no budget.
template <class Problem>
RunResult<Problem> run(const Problem& problem, const RunConfig& cfg) {
  using Result = RunResult<Problem>;
  using Member = typename Result::Member;
  using Genotype = typename Problem::Genotype;

  if (cfg.population < 2) throw std::invalid_argument("run: population must be at least 2");
  if (cfg.budget < cfg.population)
    throw std::invalid_argument("run: budget below population size");
  if (!(cfg.crossover_rate >= 0.0 && cfg.crossover_rate <= 1.0) ||
      !(cfg.mutation_rate >= 0.0 && cfg.mutation_rate <= 1.0))
    throw std::invalid_argument("run: operator rates outside [0,1]");
  if (cfg.ibea_kappa <= 0.0) throw std::invalid_argument("run: kappa must be positive");
  if (cfg.moead_neighbors < 2) throw std::invalid_argument("run: neighborhood too small");

  Rng rng(cfg.seed);
  const auto start = std::chrono::steady_clock::now();
  Result res;

  auto evaluate = [&](Genotype g) {
    const auto s = problem.decode(g);  // anything with .objectives and .feasible
    ++res.evaluations;
    if (s.feasible) ++res.feasible_evaluations;
    return Member{std::move(g), s.objectives, s.feasible};
  };
  auto archive_add = [&](const Member& m) {
    if (!m.feasible) return;
    const Point3 p = to_point(m.objectives);
    for (const auto& x : res.archive) {
      if (x.objectives == m.objectives) return;
      if (dominates(to_point(x.objectives), p)) return;
    }
    std::erase_if(res.archive,
                  [&](const Member& x) { return dominates(p, to_point(x.objectives)); });
    res.archive.push_back(m);
  };
  auto log_generation = [&]() {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    res.log.push_back({res.evaluations, static_cast<int>(res.archive.size()),
                       detail::archive_hypervolume(res.archive), ms});
  };
  auto points_of = [](const std::vector<Member>& pop) {
    std::vector<Point3> pts(pop.size());
    std::vector<char> feas(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
      pts[i] = to_point(pop[i].objectives);
      feas[i] = pop[i].feasible;
    }
    return std::make_pair(std::move(pts), std::move(feas));
  };

  // Variation shared by all three loops. A child equal to the genotype it
  // was derived from keeps that parent's cached evaluation.
  struct Child {
    Genotype genotype;
    const Member* cache = nullptr;  // non-null: reuse, no budget consumed
  };
  auto make_children = [&](const Member& a, const Member& b) {
    std::vector<Child> out;
    if (rng.bernoulli(cfg.crossover_rate)) {
      auto [g1, g2] = problem.crossover(a.genotype, b.genotype, rng);
      out.push_back({std::move(g1), nullptr});
      out.push_back({std::move(g2), nullptr});
      for (auto& ch : out) {
        if (ch.genotype == a.genotype) ch.cache = &a;
        else if (ch.genotype == b.genotype) ch.cache = &b;
      }
    } else {
      out.push_back({a.genotype, &a});
      out.push_back({b.genotype, &b});
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
      Genotype m = problem.mutate(out[k].genotype, rng, cfg.mutation_rate);
      if (!(m == out[k].genotype)) out[k] = {std::move(m), nullptr};
    }
    return out;
  };

  const int n = cfg.population;

  if (cfg.algorithm == Algorithm::Moead) {
    const auto weights = simplex_lattice_weights(n);
    const auto hood = moead_neighborhoods(weights, cfg.moead_neighbors);
    const int m = static_cast<int>(weights.size());

    std::vector<Member> pop;
    pop.reserve(m);
    Point3 ideal{};
    bool have_ideal = false;
    auto absorb_ideal = [&](const Member& mem) {
      if (!mem.feasible) return;
      const Point3 p = to_point(mem.objectives);
      if (!have_ideal) {
        ideal = p;
        have_ideal = true;
      } else {
        for (int d = 0; d < 3; ++d) ideal[d] = std::min(ideal[d], p[d]);
      }
    };
    for (int i = 0; i < m; ++i) {
      pop.push_back(evaluate(problem.init(rng)));
      absorb_ideal(pop.back());
      archive_add(pop.back());
    }
    log_generation();

    int stagnant_passes = 0;
    while (res.evaluations < cfg.budget) {
      const int before = res.evaluations;
      for (int i = 0; i < m && res.evaluations < cfg.budget; ++i) {
        const auto& nb = hood[i];
        const Member& pa = pop[nb[rng.uniform_index(nb.size())]];
        const Member& pb = pop[nb[rng.uniform_index(nb.size())]];
        auto children = make_children(pa, pb);
        Child& ch = children[0];  // steady state: one child per subproblem
        Member cand = ch.cache ? *ch.cache : evaluate(std::move(ch.genotype));
        if (!ch.cache) archive_add(cand);
        absorb_ideal(cand);
        for (int j : nb) {
          Member& cur = pop[j];
          bool better = false;
          if (cand.feasible && !cur.feasible) {
            better = true;
          } else if (cand.feasible && cur.feasible && have_ideal) {
            better = tchebycheff(to_point(cand.objectives), weights[j], ideal) <
                     tchebycheff(to_point(cur.objectives), weights[j], ideal);
          }
          if (better) cur = cand;
        }
      }
      log_generation();
      stagnant_passes = res.evaluations == before ? stagnant_passes + 1 : 0;
      if (stagnant_passes >= 50)
        throw std::runtime_error("run: operators produce no new genotypes, budget unreachable");
    }
    res.population = std::move(pop);
    return res;
  }

  // Generational NSGA-II / IBEA skeleton.
  std::vector<Member> pop;
  pop.reserve(n);
  for (int i = 0; i < n; ++i) {
    pop.push_back(evaluate(problem.init(rng)));
    archive_add(pop.back());
  }
  log_generation();

  // Per-front crowding, expanded back to population indexing.
  auto crowding_by_rank = [&](const std::vector<Point3>& pts, const std::vector<int>& rank) {
    std::vector<double> crowd(pts.size(), 0.0);
    const int max_rank = rank.empty() ? 0 : *std::max_element(rank.begin(), rank.end());
    for (int r = 0; r <= max_rank; ++r) {
      std::vector<int> idx;
      for (std::size_t i = 0; i < pts.size(); ++i)
        if (rank[i] == r) idx.push_back(static_cast<int>(i));
      if (idx.empty()) continue;
      std::vector<Point3> front;
      front.reserve(idx.size());
      for (int i : idx) front.push_back(pts[i]);
      const auto d = crowding_distance(front);
      for (std::size_t k = 0; k < idx.size(); ++k) crowd[idx[k]] = d[k];
    }
    return crowd;
  };

  int stagnant_generations = 0;
  while (res.evaluations < cfg.budget) {
    const int before = res.evaluations;

    // Mating selection state over the current population.
    auto [pts, feas] = points_of(pop);
    std::vector<int> rank;
    std::vector<double> score;  // crowding or IBEA fitness
    if (cfg.algorithm == Algorithm::Nsga2) {
      rank = non_dominated_ranks(pts, feas);
      score = crowding_by_rank(pts, rank);
    } else {
      std::vector<Point3> feas_pts;
      std::vector<int> feas_idx;
      for (std::size_t i = 0; i < pop.size(); ++i)
        if (feas[i]) {
          feas_pts.push_back(pts[i]);
          feas_idx.push_back(static_cast<int>(i));
        }
      const auto fit = ibea_fitness(feas_pts, cfg.ibea_kappa);
      rank.assign(pop.size(), 1);  // infeasible lose every tournament
      score.assign(pop.size(), -std::numeric_limits<double>::infinity());
      for (std::size_t k = 0; k < feas_idx.size(); ++k) {
        rank[feas_idx[k]] = 0;
        score[feas_idx[k]] = fit[k];
      }
    }
    auto tournament = [&]() -> const Member& {
      int i = static_cast<int>(rng.uniform_index(pop.size()));
      int j = static_cast<int>(rng.uniform_index(pop.size()));
      if (i > j) std::swap(i, j);  // lowest index wins full ties
      const bool j_wins = rank[j] < rank[i] || (rank[j] == rank[i] && score[j] > score[i]);
      return pop[j_wins ? j : i];
    };

    std::vector<Member> offspring;
    offspring.reserve(n + 1);
    while (static_cast<int>(offspring.size()) < n) {
      const Member& a = tournament();
      const Member& b = tournament();
      for (auto& ch : make_children(a, b)) {
        if (ch.cache) {
          offspring.push_back(*ch.cache);
        } else if (res.evaluations < cfg.budget) {
          offspring.push_back(evaluate(std::move(ch.genotype)));
          archive_add(offspring.back());
        }
      }
      if (res.evaluations >= cfg.budget) break;
    }

    // Environmental selection over parents + offspring.
    std::vector<Member> merged = std::move(pop);
    for (auto& o : offspring) merged.push_back(std::move(o));
    auto [mp, mf] = points_of(merged);

    std::vector<int> keep;
    if (cfg.algorithm == Algorithm::Nsga2) {
      const auto mrank = non_dominated_ranks(mp, mf);
      const auto mcrowd = crowding_by_rank(mp, mrank);
      std::vector<int> order(merged.size());
      for (std::size_t i = 0; i < merged.size(); ++i) order[i] = static_cast<int>(i);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (mrank[a] != mrank[b]) return mrank[a] < mrank[b];
        if (mcrowd[a] != mcrowd[b]) return mcrowd[a] > mcrowd[b];
        return a < b;
      });
      keep.assign(order.begin(), order.begin() + n);
    } else {
      // Infeasible individuals go first (highest index first); the epsilon
      // indicator then trims the feasible remainder.
      std::vector<int> alive;
      for (std::size_t i = 0; i < merged.size(); ++i) alive.push_back(static_cast<int>(i));
      for (int i = static_cast<int>(merged.size()) - 1;
           i >= 0 && static_cast<int>(alive.size()) > n; --i)
        if (!mf[i]) alive.erase(std::find(alive.begin(), alive.end(), i));
      if (static_cast<int>(alive.size()) > n) {
        std::vector<Point3> apts;
        apts.reserve(alive.size());
        for (int i : alive) apts.push_back(mp[i]);
        keep.clear();
        for (int k : ibea_env_select(apts, n, cfg.ibea_kappa)) keep.push_back(alive[k]);
      } else {
        keep = std::move(alive);
      }
    }
    std::sort(keep.begin(), keep.end());
    pop.clear();
    pop.reserve(n);
    for (int i : keep) pop.push_back(std::move(merged[i]));

    log_generation();
    stagnant_generations = res.evaluations == before ? stagnant_generations + 1 : 0;
    if (stagnant_generations >= 50)
      throw std::runtime_error("run: operators produce no new genotypes, budget unreachable");
  }

  res.population = std::move(pop);
  return res;
}

}  // namespace vnfp
