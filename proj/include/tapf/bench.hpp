#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "tapf/bomb_instance.hpp"
#include "tapf/ct_search.hpp"
#include "tapf/dragon_env.hpp"
#include "tapf/instance_generator.hpp"
#include "tapf/partitioner.hpp"
#include "tapf/solve_task.hpp"

namespace tapf {

/// The swept knobs of one benchmark cell.
struct CellParams {
  int bombs_per_region = 5;
  int bombs_per_subtask = 2;
  double seconds_per_timestep = 2;
  auto operator<=>(const CellParams&) const = default;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  SolverKind solver = SolverKind::CbsTaPtc;
  CellParams cell;
  HeuristicKind heuristic = HeuristicKind::FuseLengthAscending;
  double epsilon = 1.0;
  SolveStatus outcome = SolveStatus::Unsolvable;
  double value = 0;
  double max_return = 0;
  double optimality_ratio = 0;
  double wall_seconds = 0;
  std::uint64_t nodes_expanded = 0;
  std::uint64_t roots_evaluated = 0;
  std::string error;

  /// Success: whole-task return reached epsilon times the maximum in time.
  bool success() const { return error.empty() && outcome == SolveStatus::Optimal; }
};

struct TrialOutput {
  TrialRecord record;
  TaskSolution solution;
};

/// Solves one instance end to end. Wall time covers only the solve.
inline TrialOutput run_trial(const InstanceSpec& inst, std::uint64_t seed, const CellParams& cell,
                             HeuristicKind heuristic, const SolverOptions& options) {
  TrialOutput out;
  TrialRecord& rec = out.record;
  rec.seed = seed;
  rec.solver = options.kind;
  rec.cell = cell;
  rec.heuristic = heuristic;
  rec.epsilon = options.epsilon;
  rec.max_return = max_return(inst);

  const Task task = compile_bomb_task(inst);
  const DragonOracle oracle(inst, task);
  PartitionOptions part;
  part.heuristic = heuristic;
  part.bombs_per_subtask = cell.bombs_per_subtask;
  part.seed = seed;
  const auto agents = agent_specs(inst);
  const auto states = initial_states(inst);

  const auto t0 = std::chrono::steady_clock::now();
  out.solution = solve_task(inst.graph, agents, states, task, part, oracle, options);
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  rec.outcome = out.solution.status;
  rec.value = out.solution.value;
  rec.optimality_ratio = rec.max_return > 0 ? rec.value / rec.max_return : 1.0;
  rec.nodes_expanded = out.solution.stats.nodes_expanded;
  rec.roots_evaluated = out.solution.stats.roots_enumerated;
  return out;
}

struct SweepConfig {
  GeneratorParams base;
  std::vector<int> bombs_per_region{1, 3, 5, 7, 9};
  std::vector<int> bombs_per_subtask{1, 2, 3};
  std::vector<double> seconds_per_timestep{1, 2, 3};
  /// Values held fixed while another axis varies. Ignored when `full_grid`.
  CellParams centre{5, 2, 2};
  bool full_grid = false;
  int trials = 10;
  std::uint64_t base_seed = 1;
  double timeout_seconds = 60;
  /// Expansion budget per subtask; unlike the clock it cuts runs reproducibly.
  std::uint64_t max_expansions = std::numeric_limits<std::uint64_t>::max();
  std::vector<SolverKind> solvers{SolverKind::CbsTaPtc, SolverKind::CbsTa};
  HeuristicKind heuristic = HeuristicKind::FuseLengthAscending;
  double epsilon = 1.0;
  bool collision_checking = false;
  int parallel_roots = 1;
  /// Trials run at once. Rows keep sweep order whatever the value.
  int jobs = 1;
};

inline void validate_sweep(const SweepConfig& c) {
  if (c.trials < 1) throw ConfigError("sweep needs at least one trial per cell");
  if (c.bombs_per_region.empty() || c.bombs_per_subtask.empty() || c.seconds_per_timestep.empty())
    throw ConfigError("sweep axes must be non-empty");
  if (c.solvers.empty()) throw ConfigError("sweep needs at least one solver");
  if (c.jobs < 1) throw ConfigError("jobs must be at least 1");
}

/// Cells in sweep order: either the full grid, or one axis at a time through
/// the centre cell (each distinct cell once).
inline std::vector<CellParams> sweep_cells(const SweepConfig& c) {
  std::vector<CellParams> cells;
  const auto add = [&](CellParams p) {
    if (std::find(cells.begin(), cells.end(), p) == cells.end()) cells.push_back(p);
  };
  if (c.full_grid) {
    for (int b : c.bombs_per_region)
      for (int s : c.bombs_per_subtask)
        for (double t : c.seconds_per_timestep) add({b, s, t});
    return cells;
  }
  for (int b : c.bombs_per_region) add({b, c.centre.bombs_per_subtask, c.centre.seconds_per_timestep});
  for (int s : c.bombs_per_subtask) add({c.centre.bombs_per_region, s, c.centre.seconds_per_timestep});
  for (double t : c.seconds_per_timestep) add({c.centre.bombs_per_region, c.centre.bombs_per_subtask, t});
  return cells;
}

inline InstanceSpec cell_instance(const SweepConfig& c, const CellParams& cell, std::uint64_t seed) {
  GeneratorParams p = c.base;
  p.bombs_per_region = cell.bombs_per_region;
  p.seconds_per_timestep = cell.seconds_per_timestep;
  return generate_instance(p, seed);
}

/// Runs every (cell, trial, solver) in that order. Trial k of every cell uses
/// seed base_seed + k for both solvers. A failing trial is recorded with its
/// error and the sweep goes on. With several jobs, `on_record` still sees rows
/// in sweep order.
inline std::vector<TrialRecord> run_sweep(const SweepConfig& c,
                                          const std::function<void(const TrialRecord&)>& on_record = {}) {
  validate_sweep(c);
  struct Job {
    CellParams cell;
    std::uint64_t seed;
    SolverKind kind;
  };
  std::vector<Job> jobs;
  for (const auto& cell : sweep_cells(c))
    for (int k = 0; k < c.trials; ++k)
      for (SolverKind kind : c.solvers) jobs.push_back({cell, c.base_seed + static_cast<std::uint64_t>(k), kind});

  const auto run = [&](const Job& j) {
    SolverOptions o;
    o.kind = j.kind;
    o.epsilon = c.epsilon;
    o.timeout_seconds = c.timeout_seconds;
    o.max_expansions = c.max_expansions;
    o.collision_checking = c.collision_checking;
    o.parallel_roots = c.parallel_roots;
    TrialRecord rec;
    try {
      rec = run_trial(cell_instance(c, j.cell, j.seed), j.seed, j.cell, c.heuristic, o).record;
    } catch (const std::exception& e) {
      rec.seed = j.seed;
      rec.solver = j.kind;
      rec.cell = j.cell;
      rec.heuristic = c.heuristic;
      rec.epsilon = c.epsilon;
      rec.error = e.what();
    }
    return rec;
  };

  std::vector<TrialRecord> rows(jobs.size());
  std::vector<bool> ready(jobs.size(), false);
  std::size_t reported = 0;
  std::mutex mu;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      TrialRecord rec = run(jobs[i]);
      const std::lock_guard lock(mu);
      rows[i] = std::move(rec);
      ready[i] = true;
      for (; reported < jobs.size() && ready[reported]; ++reported)
        if (on_record) on_record(rows[reported]);
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(c.jobs), jobs.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

inline std::string csv_header() {
  return "seed,solver,bombs_per_region,bombs_per_subtask,seconds_per_timestep,heuristic,epsilon,outcome,"
         "return,max_return,optimality_ratio,wall_time_seconds,nodes_expanded,roots_evaluated,error";
}

inline std::string csv_row(const TrialRecord& r) {
  std::ostringstream os;
  os << r.seed << ',' << to_string(r.solver) << ',' << r.cell.bombs_per_region << ',' << r.cell.bombs_per_subtask
     << ',' << r.cell.seconds_per_timestep << ',' << to_string(r.heuristic) << ',' << r.epsilon << ','
     << (r.error.empty() ? to_string(r.outcome) : "error") << ',' << r.value << ',' << r.max_return << ','
     << r.optimality_ratio << ',' << r.wall_seconds << ',' << r.nodes_expanded << ',' << r.roots_evaluated << ',';
  std::string err = r.error;
  std::replace(err.begin(), err.end(), ',', ';');
  std::replace(err.begin(), err.end(), '\n', ' ');
  os << err;
  return os.str();
}

inline void write_csv(std::ostream& os, const std::vector<TrialRecord>& rows) {
  os << csv_header() << '\n';
  for (const auto& r : rows) os << csv_row(r) << '\n';
}

struct MeanSd {
  double mean = 0;
  double sd = 0;
  std::size_t n = 0;
};

/// Mean and sample standard deviation; sd is 0 below two samples.
inline MeanSd mean_sd(const std::vector<double>& xs) {
  MeanSd m;
  m.n = xs.size();
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

struct CellAggregate {
  CellParams cell;
  SolverKind solver = SolverKind::CbsTaPtc;
  std::size_t trials = 0;
  double success_rate = 0;
  MeanSd ratio;
  MeanSd runtime_optimal;
  MeanSd runtime_all;
};

inline std::vector<CellAggregate> aggregate(const std::vector<TrialRecord>& rows) {
  std::map<std::tuple<CellParams, SolverKind>, std::vector<const TrialRecord*>> groups;
  std::vector<std::tuple<CellParams, SolverKind>> order;
  for (const auto& r : rows) {
    auto key = std::make_tuple(r.cell, r.solver);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<CellAggregate> out;
  for (const auto& key : order) {
    const auto& g = groups[key];
    CellAggregate a;
    a.cell = std::get<0>(key);
    a.solver = std::get<1>(key);
    a.trials = g.size();
    std::vector<double> ratios, rt_opt, rt_all;
    std::size_t ok = 0;
    for (const TrialRecord* r : g) {
      if (r->success()) {
        ++ok;
        rt_opt.push_back(r->wall_seconds);
      }
      ratios.push_back(r->optimality_ratio);
      rt_all.push_back(r->wall_seconds);
    }
    a.success_rate = static_cast<double>(ok) / static_cast<double>(g.size());
    a.ratio = mean_sd(ratios);
    a.runtime_optimal = mean_sd(rt_opt);
    a.runtime_all = mean_sd(rt_all);
    out.push_back(a);
  }
  return out;
}

inline void write_aggregate_table(std::ostream& os, const std::vector<CellAggregate>& aggs) {
  os << "bombs_per_region,bombs_per_subtask,seconds_per_timestep,solver,trials,success_rate,ratio_mean,ratio_sd,"
        "runtime_optimal_mean,runtime_optimal_sd,runtime_all_mean,runtime_all_sd\n";
  for (const auto& a : aggs)
    os << a.cell.bombs_per_region << ',' << a.cell.bombs_per_subtask << ',' << a.cell.seconds_per_timestep << ','
       << to_string(a.solver) << ',' << a.trials << ',' << a.success_rate << ',' << a.ratio.mean << ','
       << a.ratio.sd << ',' << a.runtime_optimal.mean << ',' << a.runtime_optimal.sd << ','
       << a.runtime_all.mean << ',' << a.runtime_all.sd << '\n';
}

}  // namespace tapf
