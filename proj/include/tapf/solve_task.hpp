#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tapf/ct_search.hpp"
#include "tapf/error.hpp"
#include "tapf/partitioner.hpp"
#include "tapf/task.hpp"

namespace tapf {

/// How the full task is cut into subtasks. With neither size set the whole
/// task is one subtask.
struct PartitionOptions {
  HeuristicKind heuristic = HeuristicKind::FuseLengthAscending;
  int goals_per_subtask = 0;
  int bombs_per_subtask = 0;
  std::uint64_t seed = 0;
};

struct SubtaskSummary {
  std::vector<GoalId> goals;
  SolveStatus status = SolveStatus::Unsolvable;
  double value = 0;
  double target = 0;
  Assignment assignment;
  SearchStats stats;
  /// The subtask as solved, where its agents started, and the goal bounds of
  /// the returned node.
  Task task;
  std::vector<AgentState> starts;
  GoalBounds bounds;
};

struct TaskSolution {
  SolveStatus status = SolveStatus::Unsolvable;
  /// One path per agent from its initial state to the end of its last goal.
  std::vector<TimedPath> paths;
  double value = 0;
  double target = 0;
  std::vector<SubtaskSummary> subtasks;
  SearchStats stats;
  /// Pops of the last subtask when options.record_pops is set.
  std::vector<PoppedNode> pops;
};

/// Sorts, partitions and solves the task subtask by subtask; each subtask
/// starts where the previous one left every agent.
template <ReturnOracle Oracle>
TaskSolution solve_task(const WorldGraph& graph, std::span<const AgentSpec> agents,
                        std::span<const AgentState> initial_states, const Task& task,
                        const PartitionOptions& partition_options, const Oracle& oracle,
                        const SolverOptions& options) {
  validate_options(options);
  if (auto violations = validate_task(task); !violations.empty()) throw InputError("invalid task: " + violations.front());
  if (agents.size() != initial_states.size()) throw InputError("agent and state counts differ");
  if (partition_options.goals_per_subtask < 0 || partition_options.bombs_per_subtask < 0)
    throw ConfigError("subtask size must be positive");

  const auto units = goal_units(task);
  int beta = static_cast<int>(task.goals.size());
  if (partition_options.goals_per_subtask > 0) {
    beta = partition_options.goals_per_subtask;
  } else if (partition_options.bombs_per_subtask > 0 && !units.empty()) {
    const double mean = static_cast<double>(task.goals.size()) / static_cast<double>(units.size());
    beta = std::max(1, static_cast<int>(std::lround(partition_options.bombs_per_subtask * mean)));
  }
  const Task sorted = heuristic_sort(graph, initial_states, task, partition_options.heuristic, beta,
                                     partition_options.seed);
  std::vector<std::vector<GoalId>> chunks;
  if (partition_options.goals_per_subtask > 0) chunks = partition_goals(sorted, partition_options.goals_per_subtask);
  else if (partition_options.bombs_per_subtask > 0) chunks = partition_bombs(sorted, partition_options.bombs_per_subtask);
  else if (!sorted.goals.empty()) chunks = partition_goals(sorted, static_cast<int>(sorted.goals.size()));
  if (chunks.empty()) chunks.emplace_back();
  const bool single = chunks.size() == 1;

  SolverOptions sub_options = options;
  if (!sub_options.order_policy)
    sub_options.order_policy = single ? OrderPolicy::AllConsistentOrders : OrderPolicy::TaskOrder;
  const detail::Clock clock(options.timeout_seconds);

  TaskSolution out;
  std::vector<GoalId> all_goals;
  for (const auto& g : task.goals) all_goals.push_back(g.id);
  out.target = oracle.reward_bound(all_goals);

  std::vector<AgentState> states(initial_states.begin(), initial_states.end());
  std::vector<Solution> history;
  PlanSegments past(agents.size());
  std::map<GoalId, GoalTiming> committed, dropped;
  bool timed_out = false;

  for (const auto& chunk : chunks) {
    SubtaskProblem problem;
    problem.graph = &graph;
    problem.agents.assign(agents.begin(), agents.end());
    problem.starts = states;
    problem.task = bind_subtask(sorted, chunk, committed, dropped);
    problem.past = past;
    problem.target = oracle.evaluate(past).value + oracle.reward_bound(chunk);
    sub_options.timeout_seconds = std::max(0.0, options.timeout_seconds - clock.elapsed());

    SubtaskResult r = solve_subtask(problem, oracle, sub_options);
    if (r.status == SolveStatus::Timeout) timed_out = true;
    SubtaskSummary summary{chunk,     r.status,      r.value,        problem.target, r.assignment,
                           r.stats,   problem.task,  problem.starts, r.bounds};
    if (!single && summary.status == SolveStatus::Unsolvable) summary.status = SolveStatus::BestEffort;
    out.subtasks.push_back(std::move(summary));
    out.stats += r.stats;
    if (options.record_pops) out.pops = std::move(r.pops);

    for (std::size_t a = 0; a < agents.size(); ++a) {
      const TimedPath& p = *r.solution[a];
      for (const auto& gt : p.goal_times) committed[gt.goal] = gt;
      states[a] = {p.occupied.back(), p.end_time()};
      past[a].push_back(&p);
    }
    dropped.insert(r.dropped.begin(), r.dropped.end());
    history.push_back(std::move(r.solution));
  }

  out.paths.resize(agents.size());
  for (std::size_t a = 0; a < agents.size(); ++a) {
    TimedPath& full = out.paths[a];
    full.start_time = initial_states[a].time;
    full.occupied.push_back(initial_states[a].vertex);
    for (const TimedPath* seg : past[a]) {
      full.occupied.insert(full.occupied.end(), seg->occupied.begin() + 1, seg->occupied.end());
      full.goal_times.insert(full.goal_times.end(), seg->goal_times.begin(), seg->goal_times.end());
    }
  }
  out.value = oracle.evaluate(past).value;
  out.stats.seconds = clock.elapsed();

  if (single) out.status = out.subtasks.front().status;
  else if (out.value >= options.epsilon * out.target) out.status = SolveStatus::Optimal;
  else if (timed_out) out.status = SolveStatus::Timeout;
  else out.status = SolveStatus::BestEffort;
  return out;
}

}  // namespace tapf
