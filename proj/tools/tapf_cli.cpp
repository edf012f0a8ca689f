// Command-line front end: generate instances, solve them, replay solutions
// and run benchmark sweeps.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tapf/tapf.hpp"

namespace fs = std::filesystem;
using namespace tapf;

namespace {

enum Exit { kOk = 0, kError = 1, kUnsolvable = 2, kTimeout = 3 };

std::string default_out_dir() {
  const char* env = std::getenv("TAPF_OUT_DIR");
  return env && *env ? env : ".";
}

std::string resolve_out(const std::string& given, const std::string& fallback_name) {
  if (!given.empty()) return given;
  fs::create_directories(default_out_dir());
  return (fs::path(default_out_dir()) / fallback_name).string();
}

SolverKind parse_solver(const std::string& s) {
  if (s == "cbs-ta-ptc") return SolverKind::CbsTaPtc;
  if (s == "cbs-ta") return SolverKind::CbsTa;
  throw ConfigError("unknown solver '" + s + "' (expected cbs-ta-ptc or cbs-ta)");
}

struct GenerateArgs {
  GeneratorParams params;
  std::uint64_t seed = 1;
  std::string out;
};

struct SolveArgs {
  std::string instance;
  std::string solver = "cbs-ta-ptc";
  int bombs_per_subtask = 0;
  int goals_per_subtask = 0;
  std::string heuristic = "fuse-length-ascending";
  double epsilon = 1.0;
  double timeout = 300;
  std::uint64_t seed = 0;
  bool collisions = false;
  int parallel_roots = 1;
  std::string out;
  std::string dump_feasibility;
};

struct ReplayArgs {
  std::string instance;
  std::string solution;
  bool collisions = false;
  bool verbose = false;
};

struct BenchArgs {
  SweepConfig sweep;
  std::string heuristic = "fuse-length-ascending";
  std::vector<std::string> solvers{"cbs-ta-ptc", "cbs-ta"};
  std::string out;
};

void add_generator_options(CLI::App* cmd, GeneratorParams& p) {
  cmd->add_option("--regions", p.regions, "Number of regions")->capture_default_str();
  cmd->add_option("--nodes-per-region", p.nodes_per_region, "Vertices per region")->capture_default_str();
  cmd->add_option("--agents", p.agents, "Number of agents")->capture_default_str();
  cmd->add_option("--mission-seconds", p.mission_length_seconds, "Mission length in seconds")->capture_default_str();
  cmd->add_option("--fuse-min", p.fuse_min_seconds, "Shortest fuse in seconds")->capture_default_str();
  cmd->add_option("--fuse-max", p.fuse_max_seconds, "Longest fuse in seconds")->capture_default_str();
  cmd->add_option("--chain-min", p.chain_min, "Shortest dependency chain")->capture_default_str();
  cmd->add_option("--chain-max", p.chain_max, "Longest dependency chain")->capture_default_str();
  cmd->add_option("--countdown", p.countdown_seconds, "Countdown between cuts in seconds")->capture_default_str();
}

int cmd_generate(const GenerateArgs& a) {
  const InstanceSpec inst = generate_instance(a.params, a.seed);
  const std::string path = resolve_out(a.out, "instance-" + std::to_string(a.seed) + ".json");
  save_instance(path, inst);
  std::cout << path << '\n';
  return kOk;
}

void dump_systems(const std::string& path, const InstanceSpec& inst, const TaskSolution& sol) {
  std::ofstream os(path);
  if (!os) throw InputError("cannot write " + path);
  for (std::size_t i = 0; i < sol.subtasks.size(); ++i) {
    const auto& s = sol.subtasks[i];
    os << "# subtask " << i << '\n';
    build_system(s.task, s.assignment, s.bounds, inst.graph, s.starts).dump(os);
  }
}

int cmd_solve(const SolveArgs& a) {
  const InstanceSpec inst = load_instance(a.instance);
  SolverOptions o;
  o.kind = parse_solver(a.solver);
  o.epsilon = a.epsilon;
  o.timeout_seconds = a.timeout;
  o.collision_checking = a.collisions;
  o.parallel_roots = a.parallel_roots;

  const Task task = compile_bomb_task(inst);
  const DragonOracle oracle(inst, task);
  PartitionOptions part;
  part.heuristic = parse_heuristic(a.heuristic);
  part.bombs_per_subtask = a.bombs_per_subtask;
  part.goals_per_subtask = a.goals_per_subtask;
  part.seed = a.seed;

  CellParams cell;
  cell.bombs_per_region = inst.graph.regions().empty()
                              ? 0
                              : static_cast<int>(inst.bombs.size()) /
                                    (1 + *std::max_element(inst.graph.regions().begin(), inst.graph.regions().end()));
  cell.bombs_per_subtask = a.bombs_per_subtask;
  cell.seconds_per_timestep = inst.seconds_per_timestep;

  const auto t0 = std::chrono::steady_clock::now();
  const TaskSolution sol = solve_task(inst.graph, agent_specs(inst), initial_states(inst), task, part, oracle, o);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  SolutionDoc doc = make_solution_doc(task, sol.paths);
  doc.solver = to_string(o.kind);
  doc.status = to_string(sol.status);
  doc.value = sol.value;
  doc.max_return = max_return(inst);
  doc.nodes_expanded = sol.stats.nodes_expanded;
  doc.roots_evaluated = sol.stats.roots_enumerated;
  const std::string path = resolve_out(a.out, fs::path(a.instance).stem().string() + "-solution.json");
  save_solution(path, doc);
  if (!a.dump_feasibility.empty()) dump_systems(a.dump_feasibility, inst, sol);

  // Independent check: replay the file as written.
  const ReplayReport check = replay(inst, task, load_solution(path).trace(), a.collisions);
  if (check.value != sol.value)
    throw std::runtime_error("replayed return " + std::to_string(check.value) + " differs from solver return " +
                             std::to_string(sol.value));

  TrialRecord rec;
  rec.seed = a.seed;
  rec.solver = o.kind;
  rec.cell = cell;
  rec.heuristic = part.heuristic;
  rec.epsilon = o.epsilon;
  rec.outcome = sol.status;
  rec.value = sol.value;
  rec.max_return = doc.max_return;
  rec.optimality_ratio = doc.max_return > 0 ? sol.value / doc.max_return : 1.0;
  rec.wall_seconds = wall;
  rec.nodes_expanded = sol.stats.nodes_expanded;
  rec.roots_evaluated = sol.stats.roots_enumerated;
  std::cout << csv_header() << '\n' << csv_row(rec) << '\n';
  std::cerr << "solution written to " << path << '\n';

  switch (sol.status) {
    case SolveStatus::Unsolvable: return kUnsolvable;
    case SolveStatus::Timeout: return kTimeout;
    default: return kOk;
  }
}

int cmd_replay(const ReplayArgs& a) {
  const InstanceSpec inst = load_instance(a.instance);
  const Task task = compile_bomb_task(inst);
  const SolutionDoc doc = load_solution(a.solution);
  const ReplayReport r = replay(inst, task, doc.trace(), a.collisions);

  std::cout << "return " << r.value << " of " << max_return(inst) << '\n';
  if (!doc.solver.empty())
    std::cout << "recorded return " << doc.value << (doc.value == r.value ? " (matches)" : " (MISMATCH)") << '\n';
  for (std::size_t i = 0; i < r.paths.size(); ++i)
    for (const auto& g : r.paths[i].goal_times)
      std::cout << "agent " << i << " goal " << g.goal << " mu " << g.exec << " tau " << g.done << '\n';
  for (const auto& e : r.events)
    std::cout << "t=" << e.time << " bomb " << e.bomb << ' '
              << (e.kind == BombEvent::Kind::Defused ? "defused" : "exploded") << " (" << e.reason << ")\n";
  if (a.verbose)
    for (Timestep t = 0; t < r.final_state.time; ++t) {
      std::cout << "t=" << t;
      for (std::size_t i = 0; i < r.paths.size(); ++i) std::cout << ' ' << r.paths[i].vertex_at(t);
      std::cout << '\n';
    }
  for (const auto& s : r.stray_cuts) std::cout << "stray cut: " << s << '\n';
  for (const auto& c : r.violations) std::cout << "violation: " << describe(c) << '\n';
  std::cout << r.violations.size() << " violations, " << r.stray_cuts.size() << " stray cuts\n";
  std::cout << "verdict: " << (r.violations.empty() && r.stray_cuts.empty() ? "valid" : "invalid") << '\n';
  return doc.solver.empty() || doc.value == r.value ? kOk : kError;
}

int cmd_bench(BenchArgs& a) {
  a.sweep.heuristic = parse_heuristic(a.heuristic);
  a.sweep.solvers.clear();
  for (const auto& s : a.solvers) a.sweep.solvers.push_back(parse_solver(s));
  const fs::path dir = a.out.empty() ? fs::path(default_out_dir()) : fs::path(a.out);
  fs::create_directories(dir);
  std::ofstream trials(dir / "trials.csv");
  if (!trials) throw InputError("cannot write " + (dir / "trials.csv").string());
  trials << csv_header() << '\n';
  const auto rows = run_sweep(a.sweep, [&](const TrialRecord& r) {
    trials << csv_row(r) << '\n' << std::flush;
    std::cerr << csv_row(r) << '\n';
  });
  std::ofstream agg(dir / "aggregate.csv");
  write_aggregate_table(agg, aggregate(rows));
  write_aggregate_table(std::cout, aggregate(rows));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Task assignment and path finding with precedence and temporal constraints"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a random bomb-defusing instance");
  add_generator_options(g, gen.params);
  g->add_option("--bombs-per-region", gen.params.bombs_per_region, "Bombs per region")->capture_default_str();
  g->add_option("--seconds-per-timestep", gen.params.seconds_per_timestep, "Seconds per timestep")
      ->capture_default_str();
  g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  g->add_option("--out", gen.out, "Output file (default $TAPF_OUT_DIR/instance-<seed>.json)");

  SolveArgs sol;
  auto* s = app.add_subcommand("solve", "Solve an instance and write its solution");
  s->add_option("instance", sol.instance, "Instance file")->required();
  s->add_option("--solver", sol.solver, "cbs-ta-ptc or cbs-ta")->capture_default_str();
  s->add_option("--bombs-per-subtask", sol.bombs_per_subtask, "Bombs per subtask (0: whole task)")
      ->capture_default_str();
  s->add_option("--goals-per-subtask", sol.goals_per_subtask, "Goals per subtask (0: use bombs)")
      ->capture_default_str();
  s->add_option("--heuristic", sol.heuristic, "fuse-length-ascending, kmeans-locality or input-order")
      ->capture_default_str();
  s->add_option("--epsilon", sol.epsilon, "Accept returns of at least epsilon times the target")
      ->capture_default_str();
  s->add_option("--timeout", sol.timeout, "Time budget in seconds")->capture_default_str();
  s->add_option("--seed", sol.seed, "Seed for k-means initialisation")->capture_default_str();
  s->add_flag("--collisions", sol.collisions, "Enable vertex and edge collision checking");
  s->add_option("--parallel-roots", sol.parallel_roots, "Threads for root evaluation")->capture_default_str();
  s->add_option("--out", sol.out, "Solution file (default $TAPF_OUT_DIR/<instance>-solution.json)");
  s->add_option("--dump-feasibility", sol.dump_feasibility, "Write each subtask's difference system here");

  ReplayArgs rep;
  auto* r = app.add_subcommand("replay", "Replay a solution on the simulator and check it");
  r->add_option("instance", rep.instance, "Instance file")->required();
  r->add_option("solution", rep.solution, "Solution file")->required();
  r->add_flag("--collisions", rep.collisions, "Report vertex and edge collisions");
  r->add_flag("-v,--verbose", rep.verbose, "Print every agent's vertex per timestep");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Run a benchmark sweep and write CSV results");
  add_generator_options(b, bench.sweep.base);
  b->add_option("--bombs-per-region", bench.sweep.bombs_per_region, "Axis values")->capture_default_str();
  b->add_option("--bombs-per-subtask", bench.sweep.bombs_per_subtask, "Axis values")->capture_default_str();
  b->add_option("--seconds-per-timestep", bench.sweep.seconds_per_timestep, "Axis values")->capture_default_str();
  b->add_option("--centre-bombs-per-region", bench.sweep.centre.bombs_per_region, "Value held while others vary")
      ->capture_default_str();
  b->add_option("--centre-bombs-per-subtask", bench.sweep.centre.bombs_per_subtask, "Value held while others vary")
      ->capture_default_str();
  b->add_option("--centre-seconds-per-timestep", bench.sweep.centre.seconds_per_timestep,
                "Value held while others vary")
      ->capture_default_str();
  b->add_flag("--full-grid", bench.sweep.full_grid, "Sweep the full product of all axes");
  b->add_option("--trials", bench.sweep.trials, "Trials per cell")->capture_default_str();
  b->add_option("--timeout", bench.sweep.timeout_seconds, "Per-trial time budget in seconds")->capture_default_str();
  b->add_option("--max-expansions", bench.sweep.max_expansions, "Per-subtask expansion budget");
  b->add_option("--seed", bench.sweep.base_seed, "Seed of trial 0")->capture_default_str();
  b->add_option("--solver", bench.solvers, "Solvers to compare")->capture_default_str();
  b->add_option("--heuristic", bench.heuristic, "Goal ordering heuristic")->capture_default_str();
  b->add_option("--epsilon", bench.sweep.epsilon, "Suboptimality factor")->capture_default_str();
  b->add_flag("--collisions", bench.sweep.collision_checking, "Enable collision checking");
  b->add_option("--parallel-roots", bench.sweep.parallel_roots, "Threads for root evaluation")
      ->capture_default_str();
  b->add_option("--jobs", bench.sweep.jobs, "Trials run at once")->capture_default_str();
  b->add_option("--out", bench.out, "Output directory (default $TAPF_OUT_DIR)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*s) return cmd_solve(sol);
    if (*r) return cmd_replay(rep);
    if (*b) return cmd_bench(bench);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
